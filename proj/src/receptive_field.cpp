#include "aps/receptive_field.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "aps/error.hpp"

namespace aps {

void validate(const ConvSpec& conv) {
  if (conv.kernel < 1 || conv.kernel % 2 == 0) throw ContractError("conv kernel must be odd and >= 1");
  if (conv.stride < 1) throw ContractError("conv stride must be >= 1");
  if (conv.padding < 0) throw ContractError("conv padding must be >= 0");
  if (!(conv.max_offset >= 0.0) || !std::isfinite(conv.max_offset))
    throw ContractError("conv max_offset must be finite and >= 0");
}

namespace {

RfState fold(RfState s, double extent, int stride) {
  s.rf += (extent - 1.0) * s.jump;
  s.jump *= stride;
  return s;
}

} // namespace

RfState static_rf(std::span<const ConvSpec> stack, RfState init) {
  RfState s = init;
  for (const auto& c : stack) {
    validate(c);
    if (c.max_offset != 0.0) throw ContractError("static_rf: layer has a deformable offset, use deformed_rf_bound");
    s = fold(s, c.kernel, c.stride);
  }
  return s;
}

RfBounds deformed_rf_bound(std::span<const ConvSpec> stack, RfState init) {
  RfBounds b{init, init};
  for (const auto& c : stack) {
    validate(c);
    b.min_rf = fold(b.min_rf, c.kernel, c.stride);
    b.max_rf = fold(b.max_rf, c.kernel + 2.0 * c.max_offset, c.stride);
  }
  return b;
}

std::vector<RfRow> rf_table(std::span<const ConvSpec> stack) {
  std::vector<RfRow> rows;
  RfState plain;
  RfBounds bounds;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    ConvSpec no_offset = stack[i];
    no_offset.max_offset = 0.0;
    plain = static_rf(std::span(&no_offset, 1), plain);
    bounds.min_rf = deformed_rf_bound(stack.subspan(i, 1), bounds.min_rf).min_rf;
    bounds.max_rf = deformed_rf_bound(stack.subspan(i, 1), bounds.max_rf).max_rf;
    rows.push_back({static_cast<int>(i), plain.rf, bounds.min_rf.rf, bounds.max_rf.rf, plain.jump});
  }
  return rows;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view tok) {
  int v = 0;
  const auto t = trim(tok);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("cannot parse integer in conv stack: '" + std::string(tok) + "'");
  return v;
}

double parse_real(std::string_view tok) {
  const std::string t(trim(tok));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw ConfigError("cannot parse number in conv stack: '" + std::string(tok) + "'");
  return v;
}

} // namespace

std::vector<ConvSpec> parse_conv_stack(std::string_view text) {
  std::vector<ConvSpec> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    const std::string_view layer = text.substr(start, end - start);
    std::vector<std::string_view> fields;
    std::size_t f = 0;
    while (true) {
      const std::size_t comma = layer.find(',', f);
      fields.push_back(layer.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    if (fields.size() != 3 && fields.size() != 4)
      throw ConfigError("conv layer needs k,s,p[,offset]: '" + std::string(layer) + "'");
    ConvSpec c{parse_int(fields[0]), parse_int(fields[1]), parse_int(fields[2]),
               fields.size() == 4 ? parse_real(fields[3]) : 0.0};
    try {
      validate(c);
    } catch (const ContractError& e) {
      throw ConfigError(std::string(e.what()) + ": '" + std::string(layer) + "'");
    }
    out.push_back(c);
    start = end + 1;
  }
  return out;
}

} // namespace aps
