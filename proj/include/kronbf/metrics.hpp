// SPDX-License-Identifier: Apache-2.0
//
// kronbf: Kronecker-structured hybrid beamforming for multi-cell mmWave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "kronbf/beamformers.hpp"
#include "kronbf/channel_model.hpp"
#include "kronbf/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kronbf {

/// Post-combining powers seen by user k (linear scale).
struct SinrBreakdown {
    double p_desired = 0.0;
    double p_intra = 0.0;
    double p_inter = 0.0;
    double p_noise = 0.0;

    double sinr() const {
        const double den = p_intra + p_inter + p_noise;
        if (p_desired == 0.0)
            return 0.0;
        return p_desired / den;
    }
    double rate() const { return std::log2(1.0 + sinr()); }
};

/// Powers for the combining vector w_k = column k of W (W = F_RF F_BB).
inline SinrBreakdown sinr_breakdown(std::size_t k, const CMat& W, const Scenario& s) {
    if (W.cols() != s.num_users() || k >= W.cols())
        throw std::invalid_argument("sinr_breakdown: combiner has " + std::to_string(W.cols()) + " columns for " +
                                    std::to_string(s.num_users()) + " users");
    const auto w = W.col_span(k);
    SinrBreakdown b;
    for (std::size_t q = 0; q < s.num_users(); ++q) {
        const double p = s.P_U * std::norm(vdot(w, s.users[q].effective()));
        (q == k ? b.p_desired : b.p_intra) += p;
    }
    for (const auto& i : s.interferers)
        b.p_inter += s.P_I * std::norm(vdot(w, i.h));
    const double wn = norm2(w);
    b.p_noise = s.N0 * wn * wn;
    return b;
}

inline SinrBreakdown sinr_breakdown(std::size_t k, const HybridBeamformer& bf, const Scenario& s) {
    return sinr_breakdown(k, bf.combiner(), s);
}

inline std::vector<double> user_rates(const CMat& W, const Scenario& s) {
    std::vector<double> r;
    r.reserve(s.num_users());
    for (std::size_t k = 0; k < s.num_users(); ++k)
        r.push_back(sinr_breakdown(k, W, s).rate());
    return r;
}

/// Σ_k log₂(1 + SINR_k) in bits/s/Hz.
inline double sum_rate(const CMat& W, const Scenario& s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.num_users(); ++k)
        acc += sinr_breakdown(k, W, s).rate();
    return acc;
}

inline double sum_rate(const HybridBeamformer& bf, const Scenario& s) {
    if (s.num_users() == 0)
        return 0.0;
    return sum_rate(bf.combiner(), s);
}

/// Per-user rates of the fully digital MMSE receiver.
inline std::vector<double> baseline_pure_mmse(const Scenario& s) { return user_rates(mmse_full_digital(s), s); }

} // namespace kronbf
