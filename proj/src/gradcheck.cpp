#include "xda/gradcheck.hpp"

#include <cmath>

#include "xda/error.hpp"
#include "xda/tape.hpp"

namespace xda {

double finite_diff_check(const TensorFn& f, std::vector<Tensor> inputs, double eps) {
    if (eps <= 0.0) throw ContractError("finite_diff_check: eps must be positive");

    Tape tape;
    std::vector<Tensor> analytic;
    {
        TapeScope scope(tape);
        for (Tensor& in : inputs) tape.watch(in);
        const Tensor out = f(inputs);
        if (!out.is_scalar()) {
            throw ContractError("finite_diff_check: f must return a scalar, got shape " +
                                shape_str(out.shape()));
        }
        const GradMap grads = tape.backward(out);
        analytic.reserve(inputs.size());
        for (const Tensor& in : inputs) analytic.push_back(grads.at(in));
    }

    // Probing runs outside any tape scope; the stale bindings on `inputs`
    // make every op treat them as constants.
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t c = 0; c < inputs[i].size(); ++c) {
            const double saved = inputs[i][c];
            inputs[i][c] = saved + eps;
            const double up = f(inputs).item();
            inputs[i][c] = saved - eps;
            const double down = f(inputs).item();
            inputs[i][c] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double an = analytic[i][c];
            const double err = std::abs(an - numeric) / std::max(1.0, std::abs(an));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace xda
