#include "dfa/io.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "dfa/csv.hpp"
#include "dfa/error.hpp"

namespace dfa::io {

using json = nlohmann::ordered_json;
using Eigen::Index;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

double as_double(const json& j, const char* what) {
  if (!j.is_number()) throw DataError(std::string("parameter file: non-numeric entry in ") + what);
  return j.get<double>();
}

Eigen::MatrixXd read_matrix(const json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw DataError(std::string("parameter file: '") + what + "' has the wrong number of rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw DataError(std::string("parameter file: '") + what + "' has a row of the wrong length");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = as_double(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

Eigen::VectorXd read_vector(const json& j, Index size, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != size) {
    throw DataError(std::string("parameter file: '") + what + "' has the wrong length");
  }
  Eigen::VectorXd v(size);
  for (Index i = 0; i < size; ++i) v(i) = as_double(j[static_cast<std::size_t>(i)], what);
  return v;
}

std::string cell_text(const Cell& cell) {
  struct Visitor {
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string quoted = "\"";
      for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + "\"";
    }
    std::string operator()(double v) const { return csv::format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return number(v);
        } else {
          return json(v);
        }
      },
      cell);
}

}  // namespace

std::string params_to_json(const ParamsFile& file) {
  const DFMSpec& spec = file.spec;
  file.params.check_shapes(spec);
  json j;
  j["spec"] = {{"n", spec.n}, {"p", spec.p}, {"q", spec.q}, {"S", spec.S}};
  if (!file.tickers.empty()) j["tickers"] = file.tickers;
  j["beta"] = matrix_rows(file.params.beta);
  j["sigma"] = vector_json(file.params.sigma);
  j["lambda"] = json::array();
  for (const auto& l : file.params.lambda) j["lambda"].push_back(matrix_rows(l));
  j["psi"] = json::array();
  for (const auto& p : file.params.psi) j["psi"].push_back(vector_json(p));
  return j.dump(2) + "\n";
}

ParamsFile params_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("parameter file is not valid JSON: ") + e.what());
  }
  ParamsFile file;
  try {
    const json& s = j.at("spec");
    file.spec = DFMSpec{s.at("n").get<Index>(), s.at("p").get<Index>(), s.at("q").get<Index>(), s.at("S").get<Index>()};
  } catch (const json::exception&) {
    throw DataError("parameter file: missing or malformed 'spec'");
  }
  try {
    file.spec.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("parameter file: ") + e.what());
  }
  const DFMSpec& spec = file.spec;
  if (j.contains("tickers")) {
    try {
      file.tickers = j["tickers"].get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw DataError("parameter file: 'tickers' must be a list of strings");
    }
    if (static_cast<Index>(file.tickers.size()) != spec.S) throw DataError("parameter file: ticker count differs from S");
  }
  for (const char* key : {"beta", "sigma", "lambda", "psi"})
    if (!j.contains(key)) throw DataError(std::string("parameter file: missing '") + key + "'");
  file.params.beta = read_matrix(j["beta"], spec.S, spec.n, "beta");
  file.params.sigma = read_vector(j["sigma"], spec.S, "sigma");
  if (!j["lambda"].is_array() || static_cast<Index>(j["lambda"].size()) != spec.p) {
    throw DataError("parameter file: 'lambda' must hold p matrices");
  }
  for (const auto& l : j["lambda"]) file.params.lambda.push_back(read_matrix(l, spec.n, spec.n, "lambda"));
  if (!j["psi"].is_array() || static_cast<Index>(j["psi"].size()) != spec.q) {
    throw DataError("parameter file: 'psi' must hold q vectors");
  }
  for (const auto& p : j["psi"]) file.params.psi.push_back(read_vector(p, spec.S, "psi"));
  return file;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_params(const ParamsFile& file, const std::filesystem::path& path) { write_text(path, params_to_json(file)); }

ParamsFile read_params(const std::filesystem::path& path) { return params_from_json(csv::read_file(path)); }

void write_factor_csv(const std::vector<Date>& dates, const Eigen::MatrixXd& factors, const std::filesystem::path& path,
                      const std::string& prefix) {
  if (static_cast<Index>(dates.size()) != factors.rows()) throw UsageError("factor rows and dates differ in length");
  std::string text = "date";
  for (Index c = 0; c < factors.cols(); ++c) text += "," + prefix + std::to_string(c + 1);
  text += "\n";
  for (Index r = 0; r < factors.rows(); ++r) {
    text += format_date(dates[static_cast<std::size_t>(r)]);
    for (Index c = 0; c < factors.cols(); ++c) text += "," + csv::format_number(factors(r, c));
    text += "\n";
  }
  write_text(path, text);
}

DatedMatrix read_factor_csv(const std::filesystem::path& path) {
  const auto rows = csv::parse(csv::read_file(path));
  if (rows.size() < 2 || rows[0].size() < 2) throw DataError(path.string() + ": expected a header and data rows");
  DatedMatrix out;
  for (std::size_t c = 1; c < rows[0].size(); ++c) out.columns.push_back(csv::trim(rows[0][c]));
  const Index cols = static_cast<Index>(out.columns.size());
  out.values.resize(static_cast<Index>(rows.size() - 1), cols);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto date = parse_date(csv::trim(rows[r][0]));
    if (!date) throw DataError(path.string() + ": bad date on line " + std::to_string(r + 1));
    if (!out.dates.empty() && !(out.dates.back() < *date)) {
      throw DataError(path.string() + ": dates must be strictly increasing");
    }
    out.dates.push_back(*date);
    for (Index c = 0; c < cols; ++c) {
      const std::size_t k = static_cast<std::size_t>(c) + 1;
      const auto v = k < rows[r].size() ? csv::parse_number(rows[r][k]) : std::nullopt;
      if (!v || !std::isfinite(*v)) throw DataError(path.string() + ": bad value on line " + std::to_string(r + 1));
      out.values(static_cast<Index>(r - 1), c) = *v;
    }
  }
  return out;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw UsageError("table row width differs from header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string text;
  for (std::size_t c = 0; c < columns.size(); ++c) text += (c ? "," : "") + cell_text(columns[c]);
  text += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + cell_text(row[c]);
    text += "\n";
  }
  return text;
}

std::string Table::to_json() const {
  json out = json::array();
  for (const auto& row : rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns[c]] = cell_json(row[c]);
    out.push_back(std::move(obj));
  }
  return out.dump(2) + "\n";
}

void Table::write(const std::filesystem::path& path, bool json_format) const {
  write_text(path, json_format ? to_json() : to_csv());
}

}  // namespace dfa::io
