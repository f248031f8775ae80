// Block-detector operating points at N = 500 for a few SNRs.

#include <cstdio>

#include "mmeqd/block_detector.hpp"

int main() {
    using namespace mmeqd;
    const long n = 500;
    const std::vector<double> targets{1e-3, 1e-2, 0.05, 0.1};
    std::printf("%8s %10s %10s %10s\n", "snr_db", "pfa", "h", "pd");
    for (double db : {-20.0, -15.0, -10.0}) {
        const DistParams p{n, db_to_linear(db)};
        const BlockDetector det(p, choose_truncation(p));
        for (const RocPoint& pt : det.roc_from_pfa(targets)) {
            std::printf("%8.1f %10.4g %10.6f %10.6f\n", db, pt.p_fa, pt.h, pt.p_d);
        }
    }
}
