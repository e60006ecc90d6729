#include "intonarank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "intonarank/framing.hpp"
#include "intonarank/kernels.hpp"

namespace intonarank {

namespace {

constexpr double kLogFloor = 1e-10;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filterbank as (n_bands x n_bins) dense weights.
std::vector<std::vector<double>> mel_filterbank(int sample_rate, std::size_t nfft) {
    const std::size_t n_bins = nfft / 2 + 1;
    const double nyquist = sample_rate / 2.0;
    const double mel_max = hz_to_mel(nyquist);

    std::vector<double> edges(kMelBands + 2);
    for (int i = 0; i < kMelBands + 2; ++i) {
        edges[static_cast<std::size_t>(i)] =
            mel_to_hz(mel_max * i / (kMelBands + 1));
    }

    std::vector<std::vector<double>> bank(kMelBands, std::vector<double>(n_bins, 0.0));
    for (int b = 0; b < kMelBands; ++b) {
        const double lo = edges[static_cast<std::size_t>(b)];
        const double mid = edges[static_cast<std::size_t>(b) + 1];
        const double hi = edges[static_cast<std::size_t>(b) + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
            double w = 0.0;
            if (f > lo && f < mid) {
                w = (f - lo) / (mid - lo);
            } else if (f >= mid && f < hi) {
                w = (hi - f) / (hi - mid);
            }
            bank[static_cast<std::size_t>(b)][k] = w;
        }
    }
    return bank;
}

// Orthonormal DCT-II rows for c1..c13 over kMelBands inputs.
std::vector<std::vector<double>> dct_rows() {
    std::vector<std::vector<double>> rows(kCepstralCoeffs,
                                          std::vector<double>(kMelBands));
    const double scale = std::sqrt(2.0 / kMelBands);
    for (int k = 1; k <= kCepstralCoeffs; ++k) {
        for (int n = 0; n < kMelBands; ++n) {
            rows[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(n)] =
                scale * std::cos(std::numbers::pi * k * (n + 0.5) / kMelBands);
        }
    }
    return rows;
}

}  // namespace

MelCepstra mel_cepstra(const AudioClip& clip) {
    validate(clip);
    const int sr = clip.sample_rate;
    const int win = frame_samples(sr);
    const int hop = hop_samples(sr);
    const std::size_t n_frames = frame_count(clip.samples.size(), win, hop);
    if (n_frames == 0) throw std::invalid_argument("mel_cepstra: clip shorter than one frame");

    const std::size_t nfft = next_pow2(static_cast<std::size_t>(win));
    const std::size_t n_bins = nfft / 2 + 1;
    const auto bank = mel_filterbank(sr, nfft);
    const auto dct = dct_rows();

    std::vector<double> hann(static_cast<std::size_t>(win));
    for (int i = 0; i < win; ++i) {
        hann[static_cast<std::size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);
    }

    MelCepstra out;
    out.frames.reserve(n_frames);
    std::vector<std::complex<double>> spectrum(nfft);
    std::vector<double> power(n_bins);
    std::vector<double> log_mel(kMelBands);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t start = f * static_cast<std::size_t>(hop);
        for (std::size_t i = 0; i < nfft; ++i) {
            const double s = (i < static_cast<std::size_t>(win))
                                 ? clip.samples[start + i] * hann[i]
                                 : 0.0;
            spectrum[i] = {s, 0.0};
        }
        fft(spectrum);
        for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[k]);

        for (int b = 0; b < kMelBands; ++b) {
            const double e = kernels::active().dot(bank[static_cast<std::size_t>(b)].data(),
                                                   power.data(), n_bins);
            log_mel[static_cast<std::size_t>(b)] = std::log(std::max(e, kLogFloor));
        }

        std::vector<double> coeffs(kCepstralCoeffs);
        for (int k = 0; k < kCepstralCoeffs; ++k) {
            coeffs[static_cast<std::size_t>(k)] = kernels::active().dot(
                dct[static_cast<std::size_t>(k)].data(), log_mel.data(), kMelBands);
        }
        out.frames.push_back(std::move(coeffs));
    }
    return out;
}

double mcd(const MelCepstra& ref, const MelCepstra& syn) {
    if (ref.frames.empty() || syn.frames.empty()) {
        throw std::invalid_argument("mcd: empty input");
    }
    if (ref.frames.front().size() != syn.frames.front().size()) {
        throw std::invalid_argument("mcd: coefficient count mismatch");
    }
    const std::size_t n = std::min(ref.frames.size(), syn.frames.size());
    const double scale = 10.0 / std::numbers::ln10;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = kernels::active().sumsqdiff(
            ref.frames[i].data(), syn.frames[i].data(), ref.frames[i].size());
        total += scale * std::sqrt(2.0 * d2);
    }
    return total / static_cast<double>(n);
}

double ffe(const PitchTrack& ref, const PitchTrack& syn) {
    if (ref.hop != syn.hop) throw std::invalid_argument("ffe: hop mismatch");
    const std::size_t n = std::min(ref.frames.size(), syn.frames.size());
    if (n == 0) throw std::invalid_argument("ffe: no frames to compare");

    std::size_t errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = ref.frames[i];
        const auto& s = syn.frames[i];
        if (r.voiced != s.voiced) {
            ++errors;
        } else if (r.voiced && std::abs(s.f0 - r.f0) > 0.2 * r.f0) {
            ++errors;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(n);
}

double duration_mse(std::span<const double> ref_durations,
                    std::span<const double> syn_durations) {
    if (ref_durations.size() != syn_durations.size() || ref_durations.empty()) {
        throw std::invalid_argument("duration_mse: length mismatch or empty");
    }
    const double total = kernels::active().sumsqdiff(
        ref_durations.data(), syn_durations.data(), ref_durations.size());
    return total / static_cast<double>(ref_durations.size());
}

}  // namespace intonarank
