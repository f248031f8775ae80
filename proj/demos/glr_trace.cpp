// CUSUM tuned to the true SNR against a GLR over [-20, -5] dB on one stream
// with a change at block 40.

#include <cstdio>

#include "mmeqd/harness.hpp"

int main() {
    using namespace mmeqd;
    ModelConfig config;
    config.samples_per_block = 500;
    config.snr = db_to_linear(-12.0);
    const LlrModel glr = LlrModel::glr(500, DbGrid{-20.0, -5.0, 0.1});
    const LlrModel cusum = LlrModel::cusum(500, -12.0, glr.truncation().terms);
    const TracePair p = trace_pair(cusum, glr, config, 40L, 10.0, 400, 1);

    std::printf("%5s %9s %9s %9s %9s %6s\n", "k", "tau", "g_cusum", "g_glr", "snr_hat", "m*");
    for (std::size_t k = 0; k < p.glr.size(); ++k) {
        const double gc = k < p.cusum.size() ? p.cusum[k].g : p.cusum.back().g;
        std::printf("%5ld %9.5f %9.4f %9.4f %9.1f %6ld\n", p.glr[k].k, p.glr[k].tau, gc, p.glr[k].g,
                    *p.glr[k].alpha_hat_db, *p.glr[k].m_star);
    }
    std::printf("cusum alarm at block %ld, glr alarm at block %ld\n", p.cusum.back().k, p.glr.back().k);
}
