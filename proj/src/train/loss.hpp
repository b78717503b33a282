#pragma once

#include "core/tensor.hpp"
#include "train/data.hpp"

namespace medivista {

// Cross-entropy plus soft-Dice (foreground classes), averaged over labeled
// frames. Unlabeled frames never enter the graph, so their logits receive
// exactly zero gradient.
Tensor masked_loss(const Tensor& logits /*[classes,T,H,W]*/, const SparseLabels& labels);

}  // namespace medivista
