#include "attrition/thresholds.hpp"

#include <stdexcept>

namespace attrition {

GameParams::GameParams(const Rat& R_, const Rat& P_, const Rat& c_, const Rat& lambda_)
    : R(R_), P(P_), c(c_), lambda(lambda_) {
    if (c <= 0) throw std::invalid_argument("GameParams: c must be positive");
    if (R <= c) throw std::invalid_argument("GameParams: R must exceed c");
    if (P < 0) throw std::invalid_argument("GameParams: P must be nonnegative");
    if (lambda <= 0 || lambda > 1)
        throw std::invalid_argument("GameParams: lambda must lie in (0,1]");
}

Rat work_floor(const GameParams& params) { return params.c / params.R; }

Rat c_lambda(const GameParams& params) {
    if (params.lambda == 1) return 2 * params.R / params.c;
    return 2 * params.R / (params.c * params.lambda * (1 - params.lambda));
}

ProofConstants proof_constants(const GameParams& params) {
    ProofConstants pc;
    pc.C = c_lambda(params);
    pc.g = params.R / (params.lambda * params.c);
    pc.B = 8 * pc.C * pc.g;
    const Rat r3 = rat_pow(params.R, 3);
    const Rat c3 = rat_pow(params.c, 3);
    if (params.lambda == 1) {
        pc.sqrt_G = 128 * r3 / c3;
    } else {
        pc.sqrt_G = 128 * r3 / (c3 * params.lambda * params.lambda * (1 - params.lambda));
    }
    pc.G = pc.sqrt_G * pc.sqrt_G;
    pc.eta = 1 / pc.sqrt_G;

    pc.term1 = 1 / (2 * pc.eta * pc.G * pc.G);
    pc.term2 = 3 / pc.sqrt_G;
    pc.term3 = 2 * pc.B * pc.eta;
    pc.term4 = pc.B / pc.sqrt_G;
    pc.quarter_bound = params.c / (4 * params.R);
    pc.term_sum = pc.term1 + pc.term2 + pc.term3 + pc.term4;
    pc.each_term_strictly_below_quarter =
        pc.term1 < pc.quarter_bound && pc.term2 < pc.quarter_bound &&
        pc.term3 < pc.quarter_bound && pc.term4 < pc.quarter_bound;
    pc.sum_strictly_below_work_floor = pc.term_sum < params.c / params.R;
    return pc;
}

namespace {

// 2F/(1-F)^2, strictly increasing on (0,1).
Rat contraction_lhs(const Rat& f) {
    const Rat omf = 1 - f;
    return 2 * f / (omf * omf);
}

}  // namespace

Rat witness_threshold(std::size_t m_count, const Rat& fbar, const Rat& R) {
    if (m_count < 2) throw std::invalid_argument("witness_threshold: need at least two messages");
    if (fbar <= 0) throw std::invalid_argument("witness_threshold: density bound must be positive");
    if (R <= 0) throw std::invalid_argument("witness_threshold: R must be positive");
    const Rat target = Rat(1) / (Rat(static_cast<unsigned long>(m_count * m_count)) * fbar * R);
    const Rat tol = ratio(1, 100000000000000L);  // 1e-14
    Rat lo = 0, hi = 1;
    // The lhs runs from 0 to +inf on (0,1), so a root always exists.
    while (true) {
        const Rat mid = (lo + hi) / 2;
        const Rat val = contraction_lhs(mid);
        const Rat resid = val - target;
        if (resid >= -tol && resid <= tol) return mid;
        if (val < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

std::string AttritionCertificate::label() const {
    switch (kind) {
        case Kind::ImpossibleBoundedSupport: return "impossible-bounded-support";
        case Kind::ImpossibleWorkFloor: return "impossible-work-floor";
        case Kind::Diagnostic: return "diagnostic";
        case Kind::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

AttritionCertificate attrition_certificate(const SupplySpec& spec, const GameParams& params) {
    AttritionCertificate cert;
    if (spec.kind() == SupplySpec::Kind::Pmf) {
        cert.kind = AttritionCertificate::Kind::ImpossibleBoundedSupport;
        cert.zero_tail_at = spec.kmax() + 1;
        return cert;
    }
    const Rat floor = work_floor(params);
    const Rat f1 = spec.survival(1);
    if (f1 < floor) {
        cert.kind = AttritionCertificate::Kind::ImpossibleWorkFloor;
        cert.f1 = f1;
        cert.floor = floor;
        return cert;
    }
    // Scan survival ratios against C. Zero survival cannot occur here
    // (bounded supports were dispatched above).
    const Rat C = c_lambda(params);
    bool all = true;
    std::optional<std::size_t> largest;
    for (std::size_t k = 1; k <= kCertificateProbeDepth; ++k) {
        if (spec.survival(k) > C * spec.survival(k + 1)) {
            largest = k;
        } else {
            all = false;
        }
    }
    if (largest.has_value()) {
        cert.kind = AttritionCertificate::Kind::Diagnostic;
        // For the supported unbounded laws the survival ratio is constant in
        // k, so holding through the probe horizon means holding everywhere.
        cert.ratio_gap_all_k = all;
        if (!all) cert.ratio_gap_largest_k = largest;
        return cert;
    }
    cert.kind = AttritionCertificate::Kind::Inconclusive;
    return cert;
}

}  // namespace attrition
