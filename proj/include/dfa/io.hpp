#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "dfa/date.hpp"
#include "dfa/state_space.hpp"

namespace dfa::io {

/// Model orders plus parameters as stored on disk.
struct ParamsFile {
  DFMSpec spec;
  DFMParams params;
  std::vector<std::string> tickers;  // optional
};

std::string params_to_json(const ParamsFile& file);
ParamsFile params_from_json(std::string_view text);
void write_params(const ParamsFile& file, const std::filesystem::path& path);
/// Throws DataError for unreadable or malformed files.
ParamsFile read_params(const std::filesystem::path& path);

/// `date,f1,...,fn` CSV of daily factor values.
void write_factor_csv(const std::vector<Date>& dates, const Eigen::MatrixXd& factors, const std::filesystem::path& path,
                      const std::string& prefix = "f");
struct DatedMatrix {
  std::vector<Date> dates;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};
DatedMatrix read_factor_csv(const std::filesystem::path& path);

/// Small heterogeneous table emitted as CSV or as a JSON array of row objects.
/// Non-finite numbers become empty CSV cells and JSON nulls.
using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::string to_csv() const;
  std::string to_json() const;
  void write(const std::filesystem::path& path, bool json) const;
};

/// Writes text to a file, creating parent directories. Throws DataError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dfa::io
