#pragma once

#include <cstdint>
#include <vector>

namespace tsckit {

enum class Origin : uint8_t { Hydra = 0, Quant = 1 };

// One prunable feature set: a contiguous block of feature columns.
// Hydra sets are (kernel group, dilation) pairs, Quant sets are interval rows.
struct SetSpan {
  uint32_t set_id = 0;  // id within its origin
  Origin origin = Origin::Hydra;
  uint32_t offset = 0;  // first column
  uint32_t count = 0;   // number of columns
};

// Spans must partition [0, q) in ascending offset order.
using SetLayout = std::vector<SetSpan>;

// Concatenates two layouts, shifting the second one's offsets.
SetLayout concat_layouts(const SetLayout& first, const SetLayout& second, uint32_t second_offset);

}  // namespace tsckit
