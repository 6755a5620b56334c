#pragma once

#include <string>
#include <vector>

namespace xfer {

struct EpochRecord {
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  double train_cross_entropy = 0.0;
  double validation_cross_entropy = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// One record per completed epoch, in order.
struct EpochLog {
  std::vector<EpochRecord> epochs;
  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

/// Header `epoch,train_acc,val_acc,train_ce,val_ce`, 1-based epoch numbers,
/// 6 fractional digits. Throws UsageError on an empty log.
std::string emit_curves_csv(const EpochLog& log);
EpochLog parse_curves_csv(const std::string& text);

}  // namespace xfer
