#include "train/loss.hpp"

#include <stdexcept>

#include "core/ops.hpp"

namespace medivista {

Tensor masked_loss(const Tensor& logits, const SparseLabels& labels) {
    if (logits.ndim() != 4) {
        throw std::invalid_argument("masked_loss: logits must be [classes,T,H,W], got " +
                                    shape_str(logits.shape()));
    }
    const int classes = logits.dim(0), t = logits.dim(1);
    const int h = logits.dim(2), w = logits.dim(3);
    if (labels.masks.empty()) throw std::invalid_argument("masked_loss: no supervision in clip");
    if (labels.height != h || labels.width != w) {
        throw std::invalid_argument("masked_loss: label grid " + std::to_string(labels.height) +
                                    "x" + std::to_string(labels.width) + " vs logits " +
                                    shape_str(logits.shape()));
    }
    const int64_t hw = static_cast<int64_t>(h) * w;
    constexpr double eps = 1e-6;

    Tensor total;
    int count = 0;
    for (const auto& [f, mask] : labels.masks) {
        if (f < 0 || f >= t) {
            throw std::invalid_argument("masked_loss: labeled frame " + std::to_string(f) +
                                        " outside clip of " + std::to_string(t));
        }
        for (uint8_t id : mask) {
            if (id >= classes) {
                throw std::invalid_argument("masked_loss: class id " + std::to_string(id) +
                                            " exceeds " + std::to_string(classes) + " classes");
            }
        }
        Tensor lf = reshape(slice(logits, 1, f, 1), {classes, static_cast<int>(hw)});

        // one-hot target plane
        std::vector<double> onehot(static_cast<size_t>(classes) * hw, 0.0);
        for (int64_t i = 0; i < hw; ++i) {
            onehot[static_cast<size_t>(mask[static_cast<size_t>(i)]) * hw + i] = 1.0;
        }
        Tensor target = Tensor::from({classes, static_cast<int>(hw)}, std::move(onehot));

        Tensor ce = scale(sum(mul(target, log_softmax(lf, 0))), -1.0 / static_cast<double>(hw));

        Tensor probs = softmax(lf, 0);
        Tensor dice_sum;
        for (int c = 1; c < classes; ++c) {
            Tensor pc = slice(probs, 0, c, 1);
            Tensor gc = slice(target, 0, c, 1);
            Tensor num = add_scalar(scale(sum(mul(pc, gc)), 2.0), eps);
            Tensor den = add_scalar(add(sum(pc), sum(gc)), eps);
            Tensor score = div(num, den);
            dice_sum = dice_sum.defined() ? add(dice_sum, score) : score;
        }
        Tensor dice_loss = add_scalar(scale(dice_sum, -1.0 / static_cast<double>(classes - 1)), 1.0);

        Tensor frame_loss = add(ce, dice_loss);
        total = total.defined() ? add(total, frame_loss) : frame_loss;
        ++count;
    }
    return scale(total, 1.0 / static_cast<double>(count));
}

}  // namespace medivista
