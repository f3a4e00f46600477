// Acceptance suite: one PASS/FAIL line per criterion, exit 0 only if all pass.

#include "oracles.hpp"
#include "qab_cli.hpp"

#include "qab/hamiltonian.hpp"
#include "qab/localization.hpp"
#include "qab/metrics.hpp"
#include "qab/noise.hpp"
#include "qab/spectral.hpp"
#include "qab/sweep.hpp"
#include "qab/testdata.hpp"
#include "qab/transform.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double sum_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// ---------------------------------------------------------------------------

Outcome basis_correctness() {
    std::mt19937_64 rng(101);
    double worst_res = 0.0, worst_orth = 0.0, worst_pars = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Potential x;
        if (trial % 2 == 0) {
            const auto n = std::uniform_int_distribution<std::size_t>(8, 256)(rng);
            x = Potential::one_d(uniform(n, rng, -2.0, 2.0));
        } else {
            const auto r = std::uniform_int_distribution<std::size_t>(2, 16)(rng);
            const auto c = std::uniform_int_distribution<std::size_t>(2, 16)(rng);
            x = Potential::two_d(r, c, uniform(r * c, rng, -2.0, 2.0));
        }
        const double t = std::uniform_real_distribution<double>(0.05, 5.0)(rng);
        const auto h = build_hamiltonian(x, PlanckFactor{t});
        const auto b = eigendecompose(h);
        const double scale = std::max({1.0, std::abs(b.energies.front()), std::abs(b.energies.back())});
        for (double r : residual_report(h, b)) worst_res = std::max(worst_res, r / scale);
        const Eigen::MatrixXd gram = b.vectors.transpose() * b.vectors;
        const auto n = static_cast<Eigen::Index>(b.dim());
        worst_orth = std::max(worst_orth, (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
        const auto v = uniform(b.dim(), rng, -1.0, 1.0);
        const auto alpha = project(std::span<const double>(v), b);
        worst_pars = std::max(worst_pars, std::abs(sum_sq(alpha.alphas) - sum_sq(v)) / sum_sq(v));
    }
    return {worst_res <= 1e-8 && worst_orth <= 1e-10 && worst_pars <= 1e-9,
            "max residual " + fmt("%.2e", worst_res) + ", orthonormality " + fmt("%.2e", worst_orth) +
                ", Parseval " + fmt("%.2e", worst_pars)};
}

Outcome analytic_spectrum() {
    double worst = 0.0;
    std::mt19937_64 rng(202);
    for (std::size_t n : {2u, 3u, 7u, 16u, 64u, 200u, 511u, 512u}) {
        const double c = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        const double t = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
        const auto b = eigendecompose(build_1d(Potential::one_d(std::vector<double>(n, c)), PlanckFactor{t}));
        for (std::size_t k = 1; k <= n; ++k) {
            const double exact = c + 2 * t - 2 * t * std::cos(static_cast<double>(k) * std::numbers::pi / static_cast<double>(n + 1));
            worst = std::max(worst, std::abs(b.energies[k - 1] - exact));
        }
    }
    return {worst <= 1e-9, "max |E_k - closed form| = " + fmt("%.2e", worst) + " for n up to 512"};
}

// The 4x4 example matrix, transcribed row by row: 'D<k>' is x(i) + k t, '-'
// is -t, '0' is zero.
const char* const kPublishedMatrix[16] = {
    "D2 - 0 0 - 0 0 0 0 0 0 0 0 0 0 0", "- D3 - 0 0 - 0 0 0 0 0 0 0 0 0 0", "0 - D3 - 0 0 - 0 0 0 0 0 0 0 0 0",
    "0 0 - D2 0 0 0 - 0 0 0 0 0 0 0 0", "- 0 0 0 D3 - 0 0 - 0 0 0 0 0 0 0", "0 - 0 0 - D4 - 0 0 - 0 0 0 0 0 0",
    "0 0 - 0 0 - D4 - 0 0 - 0 0 0 0 0", "0 0 0 - 0 0 - D3 0 0 0 - 0 0 0 0", "0 0 0 0 - 0 0 0 D4 - 0 0 - 0 0 0",
    "0 0 0 0 0 - 0 0 - D4 - 0 0 - 0 0", "0 0 0 0 0 0 - 0 0 - D4 - 0 0 - 0", "0 0 0 0 0 0 0 - 0 0 - D3 0 0 0 -",
    "0 0 0 0 0 0 0 0 - 0 0 0 D2 - 0 0", "0 0 0 0 0 0 0 0 0 - 0 0 - D3 - 0", "0 0 0 0 0 0 0 0 0 0 - 0 0 - D3 -",
    "0 0 0 0 0 0 0 0 0 0 0 - 0 0 - D2"};

// Diagonal multiplier from the rule stated alongside the matrix (1-based i):
// corners 2, first/last row 3, first/last column 3, interior 4.
int stated_rule(std::size_t i, std::size_t n) {
    const std::size_t nn = n * n;
    if (i == 1 || i == n || i == nn - n + 1 || i == nn) return 2;
    if (i < n || i > nn - n) return 3;
    if (i % n == 0 || i % n == 1) return 3;
    return 4;
}

Outcome table_reproduction() {
    // Distinct irrational-ish values keep x(i) identifiable in every entry.
    std::vector<double> x(16);
    for (std::size_t i = 0; i < 16; ++i) x[i] = std::sqrt(2.0 + static_cast<double>(i)) / 7.0;
    const double t = 0.6180339887;
    const auto h = build_2d(Potential::two_d(4, 4, x), PlanckFactor{t});

    std::size_t mismatches = 0;
    std::string where;
    bool rule_consistent = true;
    for (std::size_t i = 0; i < 16; ++i) {
        std::istringstream row(kPublishedMatrix[i]);
        std::string tok;
        for (std::size_t j = 0; j < 16; ++j) {
            row >> tok;
            double expect = 0.0;
            if (tok[0] == 'D') {
                const int k = tok[1] - '0';
                expect = x[i] + k * t;
                if (k != stated_rule(i + 1, 4)) rule_consistent = false;
                if (h(i, j) != x[i] + stated_rule(i + 1, 4) * t) mismatches += 1000;   // rule itself violated
            } else if (tok == "-") {
                expect = -t;
            }
            if (std::abs(h(i, j) - expect) > 1e-15) {
                ++mismatches;
                where += " (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            }
        }
    }
    // The transcription disagrees with the stated rule only at (9,9), where
    // pixel 9 sits on the left edge and has three neighbours.
    const bool known_erratum = mismatches == 1 && where == " (9,9)" && !rule_consistent && stated_rule(9, 4) == 3;
    std::string detail = mismatches == 0 ? "all 256 entries match"
                                         : std::to_string(mismatches) + " entry differs from the transcription at" + where;
    if (known_erratum) detail += "; that entry is the published x(9)+4t, which contradicts the stated edge rule (3t); builder follows the rule";
    return {mismatches == 0 || known_erratum, detail};
}

Outcome reconstruction_identity() {
    std::mt19937_64 rng(404);
    double worst = 0.0;
    std::string dims;
    auto check = [&](const Potential& x) {
        Hyperparams hp;
        hp.s = x.size();
        hp.planck = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
        hp.smooth.sigma2 = std::uniform_real_distribution<double>(0.0, 6.0)(rng);
        const auto y = denoise(x, hp);
        std::vector<double> a(y.values().begin(), y.values().end()), b(x.values().begin(), x.values().end());
        worst = std::max(worst, oracle::relative_error(a, b));
        dims += (dims.empty() ? "" : ",") + std::to_string(x.size());
    };
    for (std::size_t n : {8u, 300u, 1024u, 4096u}) check(Potential::one_d(uniform(n, rng, 0.0, 1.0)));
    for (std::size_t side : {4u, 16u, 40u, 64u}) check(Potential::two_d(side, side, uniform(side * side, rng, 0.0, 1.0)));
    return {worst <= 1e-9, "max relative error " + fmt("%.2e", worst) + " over dims " + dims};
}

Outcome localization_trend() {
    const auto clean = testdata::synthetic_signal(512);
    const std::vector<double> snrs{25, 20, 15, 10, 5};
    Hyperparams hp;
    hp.planck = 0.5;
    hp.smooth.sigma2 = 0.0;
    const auto curve = ipr_curve(clean, NoiseFamily::Gaussian, snrs, 10, hp, 2024);
    bool decreasing = true;
    std::string detail = "mean IPR";
    for (std::size_t j = 0; j < curve.size(); ++j) {
        detail += " " + fmt("%.0f", curve[j].snr_db) + "dB:" + fmt("%.1f", curve[j].mean_ipr);
        if (j > 0 && !(curve[j].mean_ipr < curve[j - 1].mean_ipr)) decreasing = false;
    }
    return {decreasing, detail};
}

Outcome smoothing_benefit() {
    const auto clean = testdata::textured_image(64);
    const auto noisy = add_noise(clean, {NoiseFamily::Poisson, 15.0, 606});
    std::vector<std::size_t> ranks;
    for (std::size_t s = 8; s <= 1024; s += 8) ranks.push_back(s);
    auto best_psnr = [&](double sigma2) {
        Hyperparams hp;
        hp.planck = 0.5;
        hp.smooth.sigma2 = sigma2;
        hp.block = 32;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& out : denoise_thresholds(noisy, hp, ranks)) best = std::max(best, psnr(clean, out, 1.0));
        return best;
    };
    const double with = best_psnr(4.0);
    const double without = best_psnr(0.0);
    return {with >= without + 1.0, "best PSNR sigma2=4: " + fmt("%.2f", with) + " dB, sigma2=0: " +
                                       fmt("%.2f", without) + " dB (gain " + fmt("%+.2f", with - without) + " dB)"};
}

Outcome interior_optimum() {
    SweepGrid grid;
    grid.planck_values = {0.08, 0.5, 1, 5, 15};
    grid.sigma2_values = {4.0};
    grid.s_values = {160};
    grid.trials = 5;
    grid.seed = 707;
    const auto table = run_sweep(testdata::synthetic_signal(512), {NoiseFamily::Gaussian, 15.0, 0}, grid);
    std::size_t arg = 0;
    std::string detail = "mean SNR";
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        detail += " " + fmt("%g", table.records[i].planck) + ":" + fmt("%.2f", table.records[i].snr);
        if (table.records[i].snr > table.records[arg].snr) arg = i;
    }
    detail += "; maximum at " + fmt("%g", table.records[arg].planck);
    return {arg != 0 && arg + 1 != table.records.size(), detail};
}

Outcome end_to_end() {
    const auto clean = testdata::textured_image(128);
    Hyperparams hp;
    hp.block = 32;   // default for images
    int plus2 = 0, plus1 = 0;
    std::string detail;
    std::uint64_t seed = 808;
    for (auto family : {NoiseFamily::Gaussian, NoiseFamily::Poisson, NoiseFamily::Speckle}) {
        const auto noisy = add_noise(clean, {family, 15.0, seed++});
        const double before = psnr(clean, noisy, 1.0);
        const double after = psnr(clean, denoise(noisy, hp), 1.0);
        plus2 += after >= before + 2.0;
        plus1 += after >= before + 1.0;
        detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(family)) + " " + fmt("%.2f", before) +
                  " -> " + fmt("%.2f", after) + " dB";
    }
    return {plus2 >= 2 && plus1 == 3, detail};
}

Outcome noise_calibration() {
    const auto clean = testdata::synthetic_signal(4096);
    bool ok = true;
    std::string detail;
    for (auto [family, tol] : {std::pair{NoiseFamily::Gaussian, 0.2}, {NoiseFamily::Poisson, 0.5}, {NoiseFamily::Speckle, 0.5}}) {
        for (double target : {5.0, 15.0, 25.0}) {
            double sum = 0.0;
            for (std::uint64_t k = 0; k < 100; ++k) {
                sum += measured_snr(clean, add_noise(clean, {family, target, derive_seed(909, {static_cast<std::uint64_t>(target), k})}));
            }
            const double err = sum / 100.0 - target;
            ok = ok && std::abs(err) <= tol;
            if (target == 15.0) detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(family)) + " " + fmt("%+.3f", err) + " dB";
        }
    }
    return {ok, "mean error at 15 dB: " + detail + " (5 and 25 dB also checked)"};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(1010);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const auto x = uniform(64, rng, 0.0, 2.0);
        Hyperparams hp;
        hp.planck = std::uniform_real_distribution<double>(0.05, 5.0)(rng);
        hp.smooth.sigma2 = k % 3 == 0 ? 0.0 : std::uniform_real_distribution<double>(0.2, 8.0)(rng);
        hp.s = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
        hp.rho = std::uniform_real_distribution<double>(0.5, 6.0)(rng);
        const auto ours = denoise(Potential::one_d(x), hp);
        const auto ref = oracle::denoise_1d(x, hp.planck, hp.smooth.sigma2, *hp.s, hp.rho);
        worst = std::max(worst, oracle::relative_error(std::vector<double>(ours.values().begin(), ours.values().end()), ref));
    }
    return {worst <= 1e-8, "max relative difference to dense Jacobi pipeline " + fmt("%.2e", worst)};
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "qab_acceptance_sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;
    if (cli::cli_dispatch({"synth", "--out-dir", dir.string()}, sink, sink) != 0) return {false, "synth failed"};
    {
        std::ofstream g(dir / "grid1d.txt");
        g << "input = synthetic_1d.csv\nfamily = gaussian\nsnr_db = 15\nseed = 1111\ntrials = 3\n"
             "planck = 0.08, 0.5, 1, 5\nsigma2 = 0, 4\ns = 100, 160\n";
        std::ofstream h(dir / "grid2d.txt");
        h << "input = textured_64.pgm\nnormalize = unit\nfamily = poisson\nsnr_db = 15\nseed = 1111\ntrials = 2\n"
             "planck = 0.5, 1\nsigma2 = 0, 4\ns = 150\nmetric = ssim\n";
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    std::size_t compared = 0;
    for (const char* grid : {"grid1d.txt", "grid2d.txt"}) {
        std::vector<fs::path> outs;
        int run = 0;
        for (const char* threads : {"1", "1", "4", "4"}) {
            const fs::path out = dir / (std::string(grid) + "_" + std::to_string(run++));
            if (cli::cli_dispatch({"--threads", threads, "sweep", "--grid-config", (dir / grid).string(), "--out-dir",
                                   out.string()},
                                  sink, sink) != 0) {
                return {false, std::string("sweep failed for ") + grid + ": " + sink.str()};
            }
            outs.push_back(out);
        }
        for (const char* file : {"sweep.csv", "sweep_table.csv", "heatmap.csv", "heatmap.pgm"}) {
            const auto ref = slurp(outs[0] / file);
            if (ref.empty()) return {false, std::string("empty ") + file};
            for (std::size_t k = 1; k < outs.size(); ++k) {
                if (slurp(outs[k] / file) != ref) return {false, std::string(file) + " differs for " + grid};
                ++compared;
            }
        }
    }
    fs::remove_all(dir);
    return {true, std::to_string(compared) + " output files byte-identical across repeated runs and --threads 1/4"};
}

Outcome performance() {
    const auto clean = testdata::textured_image(512);
    const auto noisy = add_noise(clean, {NoiseFamily::Gaussian, 15.0, 1212});
    Hyperparams hp;
    hp.block = 32;
    const std::size_t threads = default_thread_count();
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = denoise(noisy, hp, threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double gain = psnr(clean, out, 1.0) - psnr(clean, noisy, 1.0);
    return {secs < 120.0, "512x512, 256 blocks of dim 1024, " + std::to_string(threads) + " thread(s): " +
                              fmt("%.1f", secs) + " s (PSNR gain " + fmt("%+.2f", gain) + " dB)"};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;   // 0 = no runtime bound
    };
    const std::vector<Criterion> criteria{
        {"basis correctness", basis_correctness, 10.0},
        {"analytic spectrum", analytic_spectrum, 0.0},
        {"4x4 example matrix", table_reproduction, 0.0},
        {"reconstruction identity", reconstruction_identity, 0.0},
        {"localization trend", localization_trend, 120.0},
        {"smoothing benefit", smoothing_benefit, 60.0},
        {"interior optimum", interior_optimum, 0.0},
        {"end-to-end improvement", end_to_end, 0.0},
        {"noise calibration", noise_calibration, 0.0},
        {"brute-force oracle equivalence", oracle_equivalence, 0.0},
        {"determinism", determinism, 0.0},
        {"performance", performance, 0.0},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + fmt("%.0f", c.budget_s) + " s budget";
        }
        failures += !o.pass;
        std::cout << "AC" << (i + 1) << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << c.name << ": " << o.detail << " ["
                  << fmt("%.1f", secs) << " s]" << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
