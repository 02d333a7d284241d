#pragma once

#include "tubedetr/tensor.hpp"

namespace tubedetr {

// [count, dim] table with row t = [sin(t/10000^(2i/dim)), cos(t/10000^(2i/dim))]
// interleaved over i. `dim` must be even.
Tensor sinusoid_table(std::size_t count, std::size_t dim);

// [H*W, dim] table: the first dim/2 channels encode the row index, the last
// dim/2 channels the column index. `dim` must be divisible by 4.
Tensor sinusoid_table_2d(std::size_t height, std::size_t width, std::size_t dim);

}  // namespace tubedetr
