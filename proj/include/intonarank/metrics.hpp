#pragma once

#include <span>
#include <vector>

#include "intonarank/audio.hpp"
#include "intonarank/pitch.hpp"

namespace intonarank {

inline constexpr int kMelBands = 40;
inline constexpr int kCepstralCoeffs = 13;  // c1..c13, c0 excluded

// Frames x 13 mel-cepstral coefficients.
struct MelCepstra {
    std::vector<std::vector<double>> frames;
};

// STFT (25 ms Hann window, 10 ms hop) -> 40-band mel filterbank up to Nyquist
// -> natural log floored at 1e-10 -> orthonormal DCT-II, keeping c1..c13.
MelCepstra mel_cepstra(const AudioClip& clip);

// Frame-wise Kubichek distortion in dB, (10/ln 10) * sqrt(2 * sum dc^2)
// averaged over the common frame prefix. No time warping.
double mcd(const MelCepstra& ref, const MelCepstra& syn);

// Fraction of frames with a voicing mismatch or, when both are voiced, an F0
// deviation above 20% of the reference.
double ffe(const PitchTrack& ref, const PitchTrack& syn);

double duration_mse(std::span<const double> ref_durations,
                    std::span<const double> syn_durations);

}  // namespace intonarank
