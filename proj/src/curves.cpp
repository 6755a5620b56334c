#include "xfer/curves.hpp"

#include <sstream>

#include "xfer/error.hpp"
#include "xfer/io.hpp"

namespace xfer {

namespace {
constexpr const char* kHeader = "epoch,train_acc,val_acc,train_ce,val_ce";
}

std::string emit_curves_csv(const EpochLog& log) {
  if (log.epochs.empty()) throw UsageError("cannot write curves for an empty epoch log");
  std::string out = std::string(kHeader) + "\n";
  for (std::size_t e = 0; e < log.epochs.size(); ++e) {
    const auto& r = log.epochs[e];
    out += std::to_string(e + 1) + "," + fixed(r.train_accuracy) + "," +
           fixed(r.validation_accuracy) + "," + fixed(r.train_cross_entropy) + "," +
           fixed(r.validation_cross_entropy) + "\n";
  }
  return out;
}

EpochLog parse_curves_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw DataError("curves CSV must start with '" + std::string(kHeader) + "'");
  }
  EpochLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError("curves CSV: bad number '" + cell + "'");
      }
    }
    if (v.size() != 5 || v[0] != static_cast<double>(log.epochs.size() + 1)) {
      throw DataError("curves CSV: malformed row '" + line + "'");
    }
    log.epochs.push_back(EpochRecord{v[1], v[2], v[3], v[4]});
  }
  return log;
}

}  // namespace xfer
