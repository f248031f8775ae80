// CUSUM delay bound next to a small Monte-Carlo estimate.

#include <cstdio>

#include "mmeqd/harness.hpp"
#include "mmeqd/quickest.hpp"

int main() {
    using namespace mmeqd;
    ModelConfig config;
    config.samples_per_block = 500;
    config.snr = db_to_linear(-15.0);
    const LlrModel model = LlrModel::cusum(500, -15.0);
    const BoundCalculator bounds(model.cusum_density());
    std::printf("E0[l] = %.6f  E1[l] = %.6f  gamma0 = %.6f  gamma1 = %.6f\n", bounds.expectation(Hypothesis::h0),
                bounds.expectation(Hypothesis::h1), bounds.gamma(Hypothesis::h0), bounds.gamma(Hypothesis::h1));

    const std::vector<double> hs{5, 10, 20};
    const auto td = estimate_td_curve(model, config, hs, 200, 10000);
    std::printf("%6s %14s %14s %16s\n", "h", "td_sim", "td_upper", "tfa_lower");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const QdBounds b = bounds.bounds(hs[i]);
        std::printf("%6.1f %8.2f+-%-5.2f %14.2f %16.4g\n", hs[i], td[i].mean, td[i].std_error, b.tau_d_upper,
                    b.tau_fa_lower);
    }
}
