// beamform.hpp
// Mask-driven MVDR beamforming: covariance estimation from enhanced outputs,
// principal-eigenvector steering vectors and distortionless weights.

#pragma once

#include "aecbench/masking.hpp"
#include "aecbench/signal.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace aecbench {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Per-frequency speech and interference spatial covariances.
struct CovarianceSet {
    std::vector<CMatrix> phi_s;
    std::vector<CMatrix> phi_n;
    std::size_t frames = 0;
};

// phi_s(f) = 1/T sum_t S(t,f) S(t,f)^H and phi_n likewise with N = Y - S, both
// symmetrized. Requires matching shapes and at least two channels.
CovarianceSet estimate_covariances(const Spectrogram &S_hat, const Spectrogram &Y);

struct PowerIterationOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
    // Squarings applied before the plain iterations; each doubles the
    // exponent of the eigenvalue ratio.
    int squarings = 30;
    std::size_t reference = 0;
};

// Unit-norm principal eigenvector of a Hermitian PSD matrix, phase-rotated so
// that the reference entry is real and nonnegative. Throws
// std::invalid_argument for a zero matrix.
CVector principal_eigenvector(const CMatrix &phi, const PowerIterationOptions &opts = {});
std::vector<CVector> steering_vector(const std::vector<CMatrix> &phi_s, const PowerIterationOptions &opts = {});

struct BeamformerWeights {
    std::vector<CVector> w;
    std::size_t reference_mic = 0;
    // True where phi_n could not be inverted and the reference mic is passed
    // through instead.
    std::vector<bool> fallback;

    std::size_t bins() const { return w.size(); }
    std::size_t channels() const { return w.empty() ? 0 : static_cast<std::size_t>(w[0].size()); }
};

struct MvdrOptions {
    // phi_n + loading * trace(phi_n) / M * I before inversion.
    double diagonal_loading = 1e-6;
    std::size_t reference_mic = 0;
};

// w(f) = phi_n^-1 c / (c^H phi_n^-1 c).
BeamformerWeights mvdr_weights(const CovarianceSet &cov, const std::vector<CVector> &steering,
                               const MvdrOptions &opts = {});

CMatrix load_diagonal(const CMatrix &phi, double loading);

enum class BeamformMode { kOnMic, kPostFilter };

// Single-channel output w^H(f) X(t,f). kOnMic expects microphone spectra,
// kPostFilter enhanced spectra; the arithmetic is identical.
Spectrogram apply_beamformer(const BeamformerWeights &w, const Spectrogram &input, BeamformMode mode);

// Covariances from (S_hat, Y), steering from phi_s, then MVDR weights.
BeamformerWeights mask_driven_mvdr(const Spectrogram &S_hat, const Spectrogram &Y, const MvdrOptions &opts = {},
                                   const PowerIterationOptions &power = {});

// Weights as a complex MSK1 payload with one frame, bins x channels.
MaskSet weights_to_maskset(const BeamformerWeights &w);

}  // namespace aecbench
