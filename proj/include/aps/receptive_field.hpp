#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace aps {

struct ConvSpec {
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  double max_offset = 0.0; // bound on deformable sampling offsets, 0 for plain conv
};

/// Receptive-field extent in input pixels and the input distance between
/// adjacent output cells.
struct RfState {
  double rf = 1.0;
  double jump = 1.0;

  friend bool operator==(const RfState&, const RfState&) = default;
};

struct RfBounds {
  RfState min_rf;
  RfState max_rf;
};

void validate(const ConvSpec& conv);

/// Folds rf += (kernel - 1) * jump, jump *= stride over the stack. Throws
/// ContractError if any layer has a non-zero offset bound.
RfState static_rf(std::span<const ConvSpec> stack, RfState init = {});

/// Interval of receptive fields reachable when every deformable layer may
/// stretch its kernel extent by up to 2 * max_offset.
RfBounds deformed_rf_bound(std::span<const ConvSpec> stack, RfState init = {});

struct RfRow {
  int layer = 0;
  double static_rf = 1.0; // offsets ignored
  double min_rf = 1.0;
  double max_rf = 1.0;
  double jump = 1.0;
};

/// One row per layer prefix of the stack, starting from (rf 1, jump 1).
std::vector<RfRow> rf_table(std::span<const ConvSpec> stack);

/// Parses "k,s,p[,offset];..." into layers. Throws ConfigError naming the
/// offending token.
std::vector<ConvSpec> parse_conv_stack(std::string_view text);

} // namespace aps
