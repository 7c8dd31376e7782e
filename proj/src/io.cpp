#include "eloss/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "eloss/errors.hpp"

namespace eloss {
namespace {

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '#';
  }
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "# layer: name" -> "name"; anything else -> nullopt semantics via bool.
bool parse_layer_header(const std::string& line, std::string* name) {
  std::string t = trim(line);
  if (t.empty() || t[0] != '#') return false;
  t = trim(t.substr(1));
  constexpr const char* kKey = "layer:";
  if (t.rfind(kKey, 0) != 0) return false;
  *name = trim(t.substr(std::string(kKey).size()));
  return true;
}

std::vector<double> parse_row(const std::string& line, int line_no) {
  std::vector<double> values;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE) {
      throw ParseError("invalid number '" + token + "'", line_no);
    }
    values.push_back(v);
    token.clear();
  };
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return values;
}

SampleMatrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  SampleMatrix m(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidDataError("cannot open file: " + path);
  return in;
}

void append_row(std::string* out, const SampleMatrix& m, Eigen::Index i) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j > 0) out->push_back(' ');
    *out += format_double(m(i, j));
  }
  out->push_back('\n');
}

}  // namespace

SampleMatrix load_point_matrix(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::vector<double> row = parse_row(line, line_no);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "expected " << rows.front().size() << " values, got " << row.size();
      throw ParseError(msg.str(), line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows in " + path, line_no);
  return rows_to_matrix(rows);
}

void save_point_matrix(const std::string& path, const SampleMatrix& points,
                       const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) out += "# " + c + "\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) append_row(&out, points, i);
  write_text_atomic(path, out);
}

ActivationDump load_activation_dump(const std::string& path) {
  std::ifstream in = open_for_read(path);
  ActivationDump dump;
  std::vector<std::vector<double>> rows;
  std::string current_name;
  bool in_block = false;
  int block_line = 0;
  std::string line;
  int line_no = 0;

  auto close_block = [&] {
    if (!in_block) return;
    if (rows.empty()) {
      throw ParseError("layer '" + current_name + "' has no rows", block_line);
    }
    dump.layers.emplace_back(current_name, rows_to_matrix(rows));
    rows.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string name;
    if (parse_layer_header(line, &name)) {
      close_block();
      current_name = name;
      in_block = true;
      block_line = line_no;
      continue;
    }
    if (is_comment_or_blank(line)) continue;
    std::vector<double> row = parse_row(line, line_no);
    if (row.empty()) continue;
    if (!in_block) {
      throw ParseError("data row before the first layer header", line_no);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "expected " << rows.front().size() << " values, got " << row.size();
      throw ParseError(msg.str(), line_no);
    }
    rows.push_back(std::move(row));
  }
  close_block();
  if (dump.layers.empty()) throw ParseError("no layer blocks in " + path, line_no);
  return dump;
}

void save_activation_dump(const std::string& path, const ActivationDump& dump) {
  std::string out;
  for (const auto& [name, matrix] : dump.layers) {
    out += "# layer: " + name + "\n";
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) append_row(&out, matrix, i);
  }
  write_text_atomic(path, out);
}

void save_dataset(const std::string& path, const Dataset& data,
                  const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) out += "# " + c + "\n";
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) {
      if (j > 0) out.push_back(' ');
      out += format_double(data.inputs(i, j));
    }
    out.push_back(' ');
    if (data.regression) {
      out += format_double(data.targets(i, 0));
    } else {
      out += std::to_string(data.labels(i));
    }
    out.push_back('\n');
  }
  write_text_atomic(path, out);
}

Dataset load_dataset(const std::string& path, bool regression) {
  SampleMatrix raw = load_point_matrix(path);
  if (raw.cols() < 2) {
    throw InvalidDataError("dataset file needs at least one feature and a label column: " + path);
  }
  Dataset data;
  data.regression = regression;
  data.inputs = raw.leftCols(raw.cols() - 1);
  if (regression) {
    data.targets = raw.rightCols(1);
  } else {
    data.labels.resize(raw.rows());
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      const double v = raw(i, raw.cols() - 1);
      const double r = std::nearbyint(v);
      if (std::abs(v - r) > 1e-9 || r < 0) {
        throw InvalidDataError("label column must hold nonnegative integers: " + path);
      }
      data.labels(i) = static_cast<int>(r);
    }
  }
  return data;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw InvalidDataError("cannot create directory " + target.parent_path().string());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidDataError("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidDataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw InvalidDataError("cannot rename " + tmp.string() + " to " + path);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace eloss
