#include "dbcl/spectral.hpp"

#include <cmath>
#include <complex>
#include <memory>

#include <fftw3.h>
#include <fmt/format.h>

namespace dbcl {

namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct BufferDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

// Real-to-complex transform of a fixed length, reusable across windows.
class RealFft {
public:
    explicit RealFft(int n)
        : n_(n),
          in_(static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(n)))),
          out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1)))) {
        if (!in_ || !out_) throw std::bad_alloc();
        plan_.reset(fftw_plan_dft_r2c_1d(n, static_cast<double*>(in_.get()),
                                         static_cast<fftw_complex*>(out_.get()), FFTW_ESTIMATE));
        if (!plan_) throw Error("could not create FFT plan");
    }

    double* input() { return static_cast<double*>(in_.get()); }
    void run() { fftw_execute(plan_.get()); }
    /// |X_k|^2 / N^2 for 0 <= k <= N/2
    double power(int k) const {
        const auto* out = static_cast<const fftw_complex*>(out_.get());
        double re = out[k][0], im = out[k][1];
        return (re * re + im * im) / (static_cast<double>(n_) * n_);
    }

private:
    int n_;
    std::unique_ptr<void, BufferDeleter> in_;
    std::unique_ptr<void, BufferDeleter> out_;
    std::unique_ptr<fftw_plan_s, PlanDeleter> plan_;
};

}  // namespace

std::vector<double> power_spectrum(std::span<const double> window) {
    const int n = static_cast<int>(window.size());
    if (n < 1) throw Error("empty window");
    RealFft fft(n);
    std::copy(window.begin(), window.end(), fft.input());
    fft.run();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k <= n / 2; ++k) out[k] = fft.power(k);
    for (int k = n / 2 + 1; k < n; ++k) out[k] = out[n - k];
    return out;
}

int window_length(double sample_rate_hz, double window_seconds) {
    if (!(sample_rate_hz > 0) || !(window_seconds > 0)) throw Error("sample rate and window length must be positive");
    double samples = sample_rate_hz * window_seconds;
    double rounded = std::round(samples);
    if (std::abs(samples - rounded) > 1e-9 * std::max(1.0, samples))
        throw Error(fmt::format("window of {} s at {} Hz is not a whole number of samples", window_seconds,
                                sample_rate_hz));
    if (rounded < 2) throw Error("window must span at least 2 samples");
    return static_cast<int>(rounded);
}

int nearest_bin(double sample_rate_hz, int window_len, double target_hz) {
    if (target_hz < 0) throw Error("target frequency must be non-negative");
    if (target_hz > sample_rate_hz / 2)
        throw Error(fmt::format("target frequency {} Hz is above the Nyquist frequency {} Hz", target_hz,
                                sample_rate_hz / 2));
    int bin = static_cast<int>(std::lround(target_hz * window_len / sample_rate_hz));
    return std::min(bin, window_len / 2);
}

TimeSeriesDataset band_power_series(const TimeSeriesDataset& data, double sample_rate_hz, double window_seconds,
                                    double target_hz) {
    validate_dataset(data);
    const int n = window_length(sample_rate_hz, window_seconds);
    const int bin = nearest_bin(sample_rate_hz, n, target_hz);
    RealFft fft(n);

    TimeSeriesDataset out;
    out.variables = data.variables;
    out.sampling_interval = window_seconds;
    for (const auto& t : data.trajectories) {
        const Eigen::Index windows = t.values.rows() / n;
        if (windows < 1)
            throw Error(fmt::format("window of {} samples is longer than trajectory '{}' ({} rows)", n, t.id,
                                    t.values.rows()));
        Trajectory p{t.id, Eigen::MatrixXd(windows, t.values.cols())};
        for (Eigen::Index c = 0; c < t.values.cols(); ++c)
            for (Eigen::Index w = 0; w < windows; ++w) {
                for (int i = 0; i < n; ++i) fft.input()[i] = t.values(w * n + i, c);
                fft.run();
                p.values(w, c) = fft.power(bin);
            }
        out.trajectories.push_back(std::move(p));
    }
    return out;
}

}  // namespace dbcl
