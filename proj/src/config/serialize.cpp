#include "cohort/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cohort {

namespace {

std::string shortest_real(double v) {
  // %.17g round-trips every double; try shorter forms first for readability.
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string count_bound(const std::optional<std::int64_t>& b) {
  return b ? std::to_string(*b) : "None";
}

}  // namespace

std::string serialize_task_config(const TaskConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;

  out << YAML::Key << "predicates" << YAML::Value << YAML::BeginMap;
  for (const auto& p : config.predicates) {
    out << YAML::Key << predicate_name(p) << YAML::Value << YAML::BeginMap;
    if (const auto* plain = std::get_if<PlainPredicate>(&p)) {
      out << YAML::Key << "code" << YAML::Value << YAML::DoubleQuoted << plain->code.pattern;
      if (plain->value_min) out << YAML::Key << "value_min" << YAML::Value << shortest_real(*plain->value_min);
      if (plain->value_max) out << YAML::Key << "value_max" << YAML::Value << shortest_real(*plain->value_max);
    } else {
      const auto& d = std::get<DerivedPredicate>(p);
      std::string expr = d.combinator == Combinator::any_of ? "any_of(" : "all_of(";
      for (std::size_t i = 0; i < d.operands.size(); ++i) {
        if (i) expr += ", ";
        expr += d.operands[i];
      }
      expr += ')';
      out << YAML::Key << "expr" << YAML::Value << YAML::DoubleQuoted << expr;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "trigger" << YAML::Value << config.trigger;

  out << YAML::Key << "windows" << YAML::Value << YAML::BeginMap;
  for (const auto& w : config.windows) {
    out << YAML::Key << w.name << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << YAML::DoubleQuoted << format_boundary_expr(w.start);
    out << YAML::Key << "end" << YAML::Value << YAML::DoubleQuoted << format_boundary_expr(w.end);
    out << YAML::Key << "start_inclusive" << YAML::Value << YAML::TrueFalseBool << w.start_inclusive;
    out << YAML::Key << "end_inclusive" << YAML::Value << YAML::TrueFalseBool << w.end_inclusive;
    if (!w.constraints.empty()) {
      out << YAML::Key << "has" << YAML::Value << YAML::BeginMap;
      for (const auto& c : w.constraints) {
        out << YAML::Key << c.predicate << YAML::Value << YAML::DoubleQuoted
            << "(" + count_bound(c.min) + ", " + count_bound(c.max) + ")";
      }
      out << YAML::EndMap;
    }
    if (w.label_predicate) out << YAML::Key << "label" << YAML::Value << *w.label_predicate;
    if (w.index_boundary) {
      out << YAML::Key << "index_timestamp" << YAML::Value
          << (*w.index_boundary == Side::start ? "start" : "end");
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const TaskConfig& config) {
  const std::string text = serialize_task_config(config);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  static constexpr char digits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < length; ++i) {
    hex += digits[digest[i] >> 4];
    hex += digits[digest[i] & 0xf];
  }
  return hex;
}

}  // namespace cohort
