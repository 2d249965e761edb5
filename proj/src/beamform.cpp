// beamform.cpp

#include "aecbench/beamform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aecbench {

CovarianceSet estimate_covariances(const Spectrogram &S_hat, const Spectrogram &Y) {
    if (!S_hat.same_shape(Y)) throw std::invalid_argument("estimate_covariances: spectrogram shapes differ");
    if (Y.channels() < 2) throw std::invalid_argument("estimate_covariances: need at least two channels");
    if (Y.frames() == 0) throw std::invalid_argument("estimate_covariances: no frames");
    const auto M = static_cast<Eigen::Index>(Y.channels());
    const std::size_t T = Y.frames();
    CovarianceSet cov;
    cov.frames = T;
    cov.phi_s.assign(Y.bins(), CMatrix::Zero(M, M));
    cov.phi_n.assign(Y.bins(), CMatrix::Zero(M, M));
    CVector s(M), n(M);
    for (std::size_t f = 0; f < Y.bins(); ++f) {
        auto &ps = cov.phi_s[f];
        auto &pn = cov.phi_n[f];
        for (std::size_t t = 0; t < T; ++t) {
            for (Eigen::Index c = 0; c < M; ++c) {
                s(c) = S_hat(t, f, static_cast<std::size_t>(c));
                n(c) = Y(t, f, static_cast<std::size_t>(c)) - s(c);
            }
            ps.noalias() += s * s.adjoint();
            pn.noalias() += n * n.adjoint();
        }
        ps /= static_cast<double>(T);
        pn /= static_cast<double>(T);
        ps = (0.5 * (ps + ps.adjoint())).eval();
        pn = (0.5 * (pn + pn.adjoint())).eval();
    }
    return cov;
}

namespace {

void fix_phase(CVector &v, std::size_t reference) {
    Eigen::Index idx = static_cast<Eigen::Index>(reference);
    if (idx >= v.size() || std::abs(v(idx)) < 1e-14) v.cwiseAbs().maxCoeff(&idx);
    const cdouble a = v(idx);
    if (std::abs(a) > 0) v *= std::conj(a) / std::abs(a);
    v(idx) = std::abs(v(idx));
}

}  // namespace

CVector principal_eigenvector(const CMatrix &phi, const PowerIterationOptions &opts) {
    if (phi.rows() != phi.cols() || phi.rows() == 0) throw std::invalid_argument("principal_eigenvector: not square");
    const double scale = phi.norm();
    if (!(scale > 0) || !std::isfinite(scale)) throw std::invalid_argument("principal_eigenvector: zero matrix");
    const auto M = phi.rows();

    // Deterministic start: reference basis vector plus a small fixed tilt.
    CVector v = CVector::Zero(M);
    for (Eigen::Index i = 0; i < M; ++i) v(i) = cdouble(1e-3 * static_cast<double>(i + 1), 1e-4 * static_cast<double>(i));
    v(static_cast<Eigen::Index>(std::min<std::size_t>(opts.reference, static_cast<std::size_t>(M - 1)))) += 1.0;

    // Power iteration on phi^(2^k) first: the eigenvalue ratio enters squared
    // at each step, which handles closely spaced top eigenvalues.
    CMatrix B = phi / scale;
    for (int k = 0; k < opts.squarings; ++k) {
        B = (B * B).eval();
        const double nb = B.norm();
        if (!(nb > 0)) break;
        B /= nb;
    }
    CVector u = B * v;
    if (u.norm() < 1e-12) {
        Eigen::Index col = 0;
        B.colwise().norm().maxCoeff(&col);
        u = B.col(col);
    }
    if (u.norm() > 0) v = u;
    v.normalize();

    for (int it = 0; it < opts.max_iterations; ++it) {
        CVector next = phi * v;
        const double nn = next.norm();
        if (!(nn > 0)) break;
        next /= nn;
        const double change = (next - v).norm();
        v = next;
        if (change < opts.tolerance) break;
    }
    fix_phase(v, opts.reference);
    return v;
}

std::vector<CVector> steering_vector(const std::vector<CMatrix> &phi_s, const PowerIterationOptions &opts) {
    std::vector<CVector> out;
    out.reserve(phi_s.size());
    for (std::size_t f = 0; f < phi_s.size(); ++f) {
        try {
            out.push_back(principal_eigenvector(phi_s[f], opts));
        } catch (const std::invalid_argument &) {
            throw std::invalid_argument("steering_vector: speech covariance is zero at bin " + std::to_string(f));
        }
    }
    return out;
}

CMatrix load_diagonal(const CMatrix &phi, double loading) {
    const double tr = phi.trace().real();
    CMatrix out = phi;
    out.diagonal().array() += loading * tr / static_cast<double>(phi.rows());
    return out;
}

BeamformerWeights mvdr_weights(const CovarianceSet &cov, const std::vector<CVector> &steering,
                               const MvdrOptions &opts) {
    if (steering.size() != cov.phi_n.size())
        throw std::invalid_argument("mvdr_weights: steering vectors and covariances cover different bins");
    BeamformerWeights out;
    out.reference_mic = opts.reference_mic;
    out.w.reserve(steering.size());
    out.fallback.assign(steering.size(), false);
    for (std::size_t f = 0; f < steering.size(); ++f) {
        const auto &c = steering[f];
        const auto M = c.size();
        if (cov.phi_n[f].rows() != M) throw std::invalid_argument("mvdr_weights: dimension mismatch");
        if (opts.reference_mic >= static_cast<std::size_t>(M)) throw std::invalid_argument("mvdr_weights: bad reference");
        const CMatrix loaded = load_diagonal(cov.phi_n[f], opts.diagonal_loading);
        Eigen::LLT<CMatrix> llt(loaded);
        bool ok = llt.info() == Eigen::Success && loaded.trace().real() > 0;
        CVector w;
        if (ok) {
            const CVector x = llt.solve(c);
            const cdouble denom = c.dot(x);  // c^H phi^-1 c
            ok = std::isfinite(denom.real()) && denom.real() > 0 && x.allFinite();
            if (ok) w = x / denom;
        }
        if (!ok) {
            w = CVector::Zero(M);
            w(static_cast<Eigen::Index>(opts.reference_mic)) = 1.0;
            out.fallback[f] = true;
        }
        out.w.push_back(std::move(w));
    }
    return out;
}

Spectrogram apply_beamformer(const BeamformerWeights &w, const Spectrogram &input, BeamformMode /*mode*/) {
    if (w.bins() != input.bins() || w.channels() != input.channels())
        throw std::invalid_argument("apply_beamformer: weights are " + std::to_string(w.bins()) + "x" +
                                    std::to_string(w.channels()) + ", input has " + std::to_string(input.bins()) +
                                    " bins and " + std::to_string(input.channels()) + " channels");
    Spectrogram out = input.zeros_like(1);
    for (std::size_t t = 0; t < input.frames(); ++t)
        for (std::size_t f = 0; f < input.bins(); ++f) {
            cdouble acc = 0.0;
            for (std::size_t c = 0; c < input.channels(); ++c)
                acc += std::conj(w.w[f](static_cast<Eigen::Index>(c))) * input(t, f, c);
            out(t, f, 0) = acc;
        }
    return out;
}

BeamformerWeights mask_driven_mvdr(const Spectrogram &S_hat, const Spectrogram &Y, const MvdrOptions &opts,
                                   const PowerIterationOptions &power) {
    const auto cov = estimate_covariances(S_hat, Y);
    PowerIterationOptions p = power;
    p.reference = opts.reference_mic;
    // Bins where the speech estimate is silent (e.g. masked out entirely)
    // have no steering direction; pass the reference mic through there.
    std::vector<CVector> steering;
    std::vector<bool> silent(cov.phi_s.size(), false);
    const auto M = static_cast<Eigen::Index>(Y.channels());
    for (std::size_t f = 0; f < cov.phi_s.size(); ++f) {
        if (cov.phi_s[f].norm() > 0) {
            steering.push_back(principal_eigenvector(cov.phi_s[f], p));
        } else {
            silent[f] = true;
            CVector e = CVector::Zero(M);
            e(static_cast<Eigen::Index>(opts.reference_mic)) = 1.0;
            steering.push_back(e);
        }
    }
    auto w = mvdr_weights(cov, steering, opts);
    for (std::size_t f = 0; f < silent.size(); ++f)
        if (silent[f]) {
            w.w[f] = steering[f];
            w.fallback[f] = true;
        }
    return w;
}

MaskSet weights_to_maskset(const BeamformerWeights &w) {
    MaskSet m;
    m.kind = MaskKind::kComplexSpectrum;
    m.frames = 1;
    m.bins = static_cast<std::uint32_t>(w.bins());
    m.channels = static_cast<std::uint32_t>(w.channels());
    m.values.reserve(m.cells() * 2);
    for (const auto &v : w.w)
        for (Eigen::Index c = 0; c < v.size(); ++c) {
            m.values.push_back(static_cast<float>(v(c).real()));
            m.values.push_back(static_cast<float>(v(c).imag()));
        }
    return m;
}

}  // namespace aecbench
