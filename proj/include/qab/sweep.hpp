#pragma once

#include "qab/metrics.hpp"
#include "qab/noise.hpp"
#include "qab/parallel.hpp"
#include "qab/text.hpp"
#include "qab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qab {

struct SweepGrid {
    std::vector<double> planck_values;
    std::vector<double> sigma2_values;
    std::vector<std::size_t> s_values;
    Hyperparams fixed;            // rho, block, ... for the unswept knobs
    std::size_t trials = 5;
    std::uint64_t seed = 0;

    void validate() const {
        if (planck_values.empty() || sigma2_values.empty() || s_values.empty()) {
            throw std::invalid_argument("SweepGrid: every axis needs at least one value");
        }
        if (trials < 1) throw std::invalid_argument("SweepGrid: trials must be >= 1");
        for (double t : planck_values) PlanckFactor{t};
        for (double s2 : sigma2_values) SmoothSpec{s2}.validate();
        for (auto s : s_values) {
            if (s < 1) throw std::invalid_argument("SweepGrid: s values must be >= 1");
        }
        fixed.validate();
    }
};

struct SweepRecord {
    double planck = 0.0;
    double sigma2 = 0.0;
    std::size_t s = 0;
    double snr = 0.0;    // trial means
    double psnr = 0.0;
    double ssim = std::numeric_limits<double>::quiet_NaN();   // NaN for 1D data
};

struct SweepTable {
    std::vector<SweepRecord> records;   // planck-major, then sigma2, then s
};

/// Runs every (planck, sigma2, s) combination for grid.trials noise draws and
/// records the trial-mean metrics. Noise for trial k at grid point (i, j) is
/// drawn with seed derive_seed(grid.seed, {i, j, k}); the s axis reuses that
/// draw since all cutoffs share one basis. PSNR uses peak = max(clean).
inline SweepTable run_sweep(const Potential& clean, const NoiseSpec& noise, const SweepGrid& grid,
                            std::size_t threads = default_thread_count()) {
    grid.validate();
    const std::size_t np = grid.planck_values.size();
    const std::size_t ns2 = grid.sigma2_values.size();
    const std::size_t nsv = grid.s_values.size();
    const double peak = default_peak(clean, false);
    if (!(peak > 0.0)) throw DataError("run_sweep: clean data must have a positive maximum for PSNR");

    struct TrialMetrics {
        std::vector<double> snr, psnr, ssim;
    };
    const std::size_t jobs = np * ns2 * grid.trials;
    std::vector<TrialMetrics> results(jobs);

    // Blocks already run in parallel inside one job, so parallelise only
    // across grid points to keep the pool flat.
    parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t k = job % grid.trials;
        const std::size_t j = (job / grid.trials) % ns2;
        const std::size_t i = job / (grid.trials * ns2);

        NoiseSpec spec = noise;
        spec.seed = derive_seed(grid.seed, {i, j, k});
        const Potential noisy = add_noise(clean, spec);

        Hyperparams hp = grid.fixed;
        hp.planck = grid.planck_values[i];
        hp.smooth = SmoothSpec{grid.sigma2_values[j]};
        const auto outputs = denoise_thresholds(noisy, hp, grid.s_values, 1);

        TrialMetrics& m = results[job];
        for (const auto& out : outputs) {
            m.snr.push_back(measured_snr(clean, out));
            m.psnr.push_back(psnr(clean, out, peak));
            m.ssim.push_back(clean.is_2d() ? ssim(clean, out, peak) : std::numeric_limits<double>::quiet_NaN());
        }
    });

    SweepTable table;
    table.records.reserve(np * ns2 * nsv);
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < ns2; ++j) {
            for (std::size_t q = 0; q < nsv; ++q) {
                SweepRecord r{grid.planck_values[i], grid.sigma2_values[j], grid.s_values[q], 0.0, 0.0, 0.0};
                for (std::size_t k = 0; k < grid.trials; ++k) {
                    const auto& m = results[(i * ns2 + j) * grid.trials + k];
                    r.snr += m.snr[q];
                    r.psnr += m.psnr[q];
                    r.ssim += m.ssim[q];
                }
                const auto n = static_cast<double>(grid.trials);
                r.snr /= n;
                r.psnr /= n;
                r.ssim /= n;
                table.records.push_back(r);
            }
        }
    }
    return table;
}

enum class SweepAxis { Planck, Sigma2, S };
enum class SweepMetric { Snr, Psnr, Ssim };

inline std::string_view to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::Planck: return "planck";
    case SweepAxis::Sigma2: return "sigma2";
    case SweepAxis::S: return "s";
    }
    return "unknown";
}

inline SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "planck") return SweepAxis::Planck;
    if (name == "sigma2") return SweepAxis::Sigma2;
    if (name == "s") return SweepAxis::S;
    throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

inline SweepMetric parse_sweep_metric(std::string_view name) {
    if (name == "snr") return SweepMetric::Snr;
    if (name == "psnr") return SweepMetric::Psnr;
    if (name == "ssim") return SweepMetric::Ssim;
    throw std::invalid_argument("unknown sweep metric '" + std::string(name) + "'");
}

inline double axis_value(const SweepRecord& r, SweepAxis a) {
    switch (a) {
    case SweepAxis::Planck: return r.planck;
    case SweepAxis::Sigma2: return r.sigma2;
    case SweepAxis::S: return static_cast<double>(r.s);
    }
    return 0.0;
}

struct SurfaceCell {
    double snr = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;

    [[nodiscard]] double get(SweepMetric m) const {
        switch (m) {
        case SweepMetric::Snr: return snr;
        case SweepMetric::Psnr: return psnr;
        case SweepMetric::Ssim: return ssim;
        }
        return 0.0;
    }

    bool operator==(const SurfaceCell& o) const {
        auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
        return same(snr, o.snr) && same(psnr, o.psnr) && same(ssim, o.ssim);
    }
};

/// Metrics on a rectangular (x, y) grid; cells[iy * x.size() + ix].
struct SweepSurface {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<SurfaceCell> cells;

    [[nodiscard]] const SurfaceCell& at(std::size_t ix, std::size_t iy) const { return cells.at(iy * x.size() + ix); }
    bool operator==(const SweepSurface&) const = default;
};

/// Collapses a table onto two axes. When the third axis has several values
/// the record with the best SNR is kept for each (x, y).
inline SweepSurface surface(const SweepTable& table, SweepAxis axis_x, SweepAxis axis_y) {
    if (axis_x == axis_y) throw std::invalid_argument("surface: axes must differ");
    if (table.records.empty()) throw std::invalid_argument("surface: empty table");
    SweepSurface out;
    auto add_unique = [](std::vector<double>& v, double value) {
        if (std::find(v.begin(), v.end(), value) == v.end()) v.push_back(value);
    };
    for (const auto& r : table.records) {
        add_unique(out.x, axis_value(r, axis_x));
        add_unique(out.y, axis_value(r, axis_y));
    }
    std::vector<bool> filled(out.x.size() * out.y.size(), false);
    out.cells.resize(filled.size());
    for (const auto& r : table.records) {
        const auto ix = static_cast<std::size_t>(
            std::find(out.x.begin(), out.x.end(), axis_value(r, axis_x)) - out.x.begin());
        const auto iy = static_cast<std::size_t>(
            std::find(out.y.begin(), out.y.end(), axis_value(r, axis_y)) - out.y.begin());
        const std::size_t k = iy * out.x.size() + ix;
        if (!filled[k] || r.snr > out.cells[k].snr) out.cells[k] = {r.snr, r.psnr, r.ssim};
        filled[k] = true;
    }
    for (std::size_t k = 0; k < filled.size(); ++k) {
        if (!filled[k]) {
            throw std::invalid_argument("surface: ragged grid, no record for " + std::string(to_string(axis_x)) + "=" +
                                        std::to_string(out.x[k % out.x.size()]) + ", " +
                                        std::string(to_string(axis_y)) + "=" +
                                        std::to_string(out.y[k / out.x.size()]));
        }
    }
    return out;
}

inline constexpr std::string_view kSurfaceHeader = "param_x,param_y,trial_mean_snr_db,trial_mean_psnr_db,trial_mean_ssim";

inline void write_surface_csv(std::ostream& os, const SweepSurface& s) {
    os << kSurfaceHeader << '\n';
    for (std::size_t iy = 0; iy < s.y.size(); ++iy) {
        for (std::size_t ix = 0; ix < s.x.size(); ++ix) {
            const auto& c = s.at(ix, iy);
            os << format_exact(s.x[ix]) << ',' << format_exact(s.y[iy]) << ',' << format_exact(c.snr) << ','
               << format_exact(c.psnr) << ',' << format_exact(c.ssim) << '\n';
        }
    }
}

inline SweepSurface parse_surface_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kSurfaceHeader) throw DataError("surface CSV: missing or wrong header");
    SweepTable table;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 5) {
            throw DataError("surface CSV line " + std::to_string(line_no) + ": expected 5 fields");
        }
        try {
            SweepRecord r;
            r.planck = parse_exact(fields[0]);   // x
            r.sigma2 = parse_exact(fields[1]);   // y
            r.snr = parse_exact(fields[2]);
            r.psnr = parse_exact(fields[3]);
            r.ssim = parse_exact(fields[4]);
            table.records.push_back(r);
        } catch (const DataError& e) {
            throw DataError("surface CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return surface(table, SweepAxis::Planck, SweepAxis::Sigma2);
}

inline void write_table_csv(std::ostream& os, const SweepTable& t) {
    os << "planck,sigma2,s,trial_mean_snr_db,trial_mean_psnr_db,trial_mean_ssim\n";
    for (const auto& r : t.records) {
        os << format_exact(r.planck) << ',' << format_exact(r.sigma2) << ',' << r.s << ',' << format_exact(r.snr)
           << ',' << format_exact(r.psnr) << ',' << format_exact(r.ssim) << '\n';
    }
}

/// Writes the metric as a matrix CSV (first row x values, first column y
/// values) and as an 8-bit binary PGM, one pixel per cell with x along the
/// columns. Values map linearly onto 0..255; a constant surface is 128.
inline void emit_heatmap(const SweepSurface& s, SweepMetric metric, std::ostream& csv, std::ostream& pgm) {
    csv << "y\\x";
    for (double x : s.x) csv << ',' << format_exact(x);
    csv << '\n';
    for (std::size_t iy = 0; iy < s.y.size(); ++iy) {
        csv << format_exact(s.y[iy]);
        for (std::size_t ix = 0; ix < s.x.size(); ++ix) csv << ',' << format_exact(s.at(ix, iy).get(metric));
        csv << '\n';
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : s.cells) {
        const double v = c.get(metric);
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    pgm << "P5\n" << s.x.size() << ' ' << s.y.size() << "\n255\n";
    for (const auto& c : s.cells) {
        const double v = c.get(metric);
        unsigned char px = 128;
        if (std::isnan(v)) {
            px = 0;
        } else if (hi > lo) {
            const double clamped = std::clamp(v, lo, hi);
            px = static_cast<unsigned char>(std::lround(255.0 * (clamped - lo) / (hi - lo)));
        }
        pgm.put(static_cast<char>(px));
    }
}

} // namespace qab
