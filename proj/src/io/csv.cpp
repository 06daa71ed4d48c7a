#include "cohort/errors.hpp"
#include "cohort/table_io.hpp"
#include "cohort/time.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cohort::io::detail {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string data;
  in.seekg(0, std::ios::end);
  data.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  return data;
}

// Splits one record starting at `pos`; advances past the line terminator.
// Quoted fields are unescaped into `scratch` storage.
class RecordReader {
 public:
  explicit RecordReader(std::string_view data) : data_(data) {}

  bool done() const noexcept { return pos_ >= data_.size(); }
  std::size_t line() const noexcept { return line_; }

  void next(std::vector<std::string_view>& fields) {
    fields.clear();
    scratch_.clear();
    scratch_.reserve(64);
    ++line_;
    while (true) {
      if (pos_ < data_.size() && data_[pos_] == '"') {
        ++pos_;
        std::string value;
        while (true) {
          if (pos_ >= data_.size()) throw DataError("line " + std::to_string(line_) + ": unterminated quoted field");
          char c = data_[pos_++];
          if (c == '"') {
            if (pos_ < data_.size() && data_[pos_] == '"') {
              value += '"';
              ++pos_;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line_;
            value += c;
          }
        }
        scratch_.push_back(std::move(value));
        fields.emplace_back();  // patched below
        quoted_.push_back(fields.size() - 1);
      } else {
        std::size_t start = pos_;
        while (pos_ < data_.size() && data_[pos_] != ',' && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
        fields.push_back(data_.substr(start, pos_ - start));
      }
      if (pos_ < data_.size() && data_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < data_.size() && data_[pos_] == '\r') ++pos_;
      if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
      break;
    }
    for (std::size_t i = 0; i < quoted_.size(); ++i) fields[quoted_[i]] = scratch_[i];
    quoted_.clear();
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::vector<std::string> scratch_;
  std::vector<std::size_t> quoted_;
};

[[noreturn]] void bad_value(std::size_t line, const Column& col, std::string_view text, const char* what) {
  throw DataError("line " + std::to_string(line) + ": " + what + " '" + std::string(text) +
                  "' in column '" + col.name + "'");
}

void append(Column& col, std::string_view text, std::size_t line) {
  const bool null = text.empty() && col.type != ColumnType::string;
  if (null) {
    if (col.valid.empty()) col.valid.assign(col.size(), 1);
    col.valid.push_back(0);
    if (col.type == ColumnType::float64) {
      col.reals.push_back(0.0);
    } else {
      col.ints.push_back(0);
    }
    return;
  }
  if (!col.valid.empty()) col.valid.push_back(1);
  switch (col.type) {
    case ColumnType::int64:
    case ColumnType::int8: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) bad_value(line, col, text, "invalid integer");
      if (col.type == ColumnType::int8 && (v < -128 || v > 127)) bad_value(line, col, text, "int8 out of range");
      col.ints.push_back(v);
      break;
    }
    case ColumnType::boolean:
      if (text == "true" || text == "1" || text == "True") {
        col.ints.push_back(1);
      } else if (text == "false" || text == "0" || text == "False") {
        col.ints.push_back(0);
      } else {
        bad_value(line, col, text, "invalid boolean");
      }
      break;
    case ColumnType::float64: {
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) bad_value(line, col, text, "invalid number");
      col.reals.push_back(v);
      break;
    }
    case ColumnType::string:
      col.strings.emplace_back(text);
      break;
    case ColumnType::timestamp: {
      auto ts = parse_timestamp(text);
      if (!ts) bad_value(line, col, text, "unparseable timestamp");
      col.ints.push_back(ts->micros);
      break;
    }
  }
}

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

void put_field(std::string& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

Table read_csv(const std::filesystem::path& path, std::span<const ColumnRequest> requests) {
  const std::string data = slurp(path);
  RecordReader reader(data);
  if (reader.done()) throw DataError("'" + path.string() + "' is empty (no header row)");

  std::vector<std::string_view> fields;
  reader.next(fields);
  Table table;
  std::vector<std::ptrdiff_t> slot(fields.size(), -1);
  for (const auto& f : fields) table.file_columns.emplace_back(f);

  for (const auto& req : requests) {
    std::ptrdiff_t found = -1;
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] == req.name) found = static_cast<std::ptrdiff_t>(i);
    if (found < 0) {
      if (req.required) throw DataError("'" + path.string() + "' is missing required column '" + req.name + "'");
      continue;
    }
    slot[static_cast<std::size_t>(found)] = static_cast<std::ptrdiff_t>(table.columns.size());
    table.columns.push_back(Column{.name = req.name, .type = req.type});
  }

  const std::size_t width = slot.size();
  std::size_t estimate = static_cast<std::size_t>(std::count(data.begin(), data.end(), '\n'));
  for (auto& col : table.columns) {
    if (col.type == ColumnType::float64) {
      col.reals.reserve(estimate);
    } else if (col.type == ColumnType::string) {
      col.strings.reserve(estimate);
    } else {
      col.ints.reserve(estimate);
    }
  }

  while (!reader.done()) {
    reader.next(fields);
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != width) {
      throw DataError("'" + path.string() + "' line " + std::to_string(reader.line()) + ": expected " +
                      std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < width; ++i) {
      if (slot[i] >= 0) {
        try {
          append(table.columns[static_cast<std::size_t>(slot[i])], fields[i], reader.line());
        } catch (const DataError& e) {
          throw DataError("'" + path.string() + "' " + e.what());
        }
      }
    }
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    put_field(out, table.columns[c].name);
  }
  out += '\n';
  const std::size_t rows = table.rows();
  char buf[64];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      const Column& col = table.columns[c];
      if (!col.is_valid(r)) continue;
      switch (col.type) {
        case ColumnType::int64:
        case ColumnType::int8: {
          auto [p, ec] = std::to_chars(buf, buf + sizeof buf, col.ints[r]);
          out.append(buf, p);
          break;
        }
        case ColumnType::boolean:
          out += col.ints[r] ? "true" : "false";
          break;
        case ColumnType::float64: {
          auto [p, ec] = std::to_chars(buf, buf + sizeof buf, col.reals[r]);
          out.append(buf, p);
          break;
        }
        case ColumnType::string:
          put_field(out, col.strings[r]);
          break;
        case ColumnType::timestamp:
          out += format_timestamp(Timestamp{col.ints[r]});
          break;
      }
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace cohort::io::detail
