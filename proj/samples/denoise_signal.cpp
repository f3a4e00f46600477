// Denoises the bundled synthetic signal and prints the SNR before and after.
#include "qab/metrics.hpp"
#include "qab/noise.hpp"
#include "qab/testdata.hpp"
#include "qab/transform.hpp"

#include <iostream>

int main() {
    const qab::Potential clean = qab::testdata::synthetic_signal();
    const qab::Potential noisy = qab::add_noise(clean, {qab::NoiseFamily::Gaussian, 15.0, 2024});

    qab::Hyperparams hp;
    hp.planck = 1.0;
    hp.s = 160;
    const qab::Potential denoised = qab::denoise(noisy, hp);

    std::cout << "noisy    SNR " << qab::measured_snr(clean, noisy) << " dB\n"
              << "denoised SNR " << qab::measured_snr(clean, denoised) << " dB\n";
}
