#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bsv/dispersion.hpp"

using namespace bsv;

// Frozen reference values from tests/oracles/dispersion_oracle.py, a
// standalone evaluation of the shipped dispersion polynomial.
namespace {
constexpr double kNO_709_4 = 1.664515114;
constexpr double kNO_354_7 = 1.705596398;
constexpr double kNE_354_7 = 1.577525320;
constexpr double kTheta0 = 32.944793294585;  // degrees, exact degenerate phase matching
constexpr double kDk700 = -110.466239796;   // 1/m at the phase-matched angle
constexpr double kConj702_4 = 716.540926;   // nm

DispersionTable bbo() { return DispersionTable::load("bbo_eimerl_1987"); }

CrystalConfig crystal_at(double cut_deg, double offset_deg = 0.0) {
    CrystalConfig c;
    c.cut_angle_deg = cut_deg;
    c.orientation_offset_deg = offset_deg;
    return c;
}
}  // namespace

TEST_CASE("refractive indices match the standalone oracle") {
    const auto t = bbo();
    CHECK(t.n_ordinary(709.4) == doctest::Approx(kNO_709_4).epsilon(1e-8));
    CHECK(t.n_ordinary(354.7) == doctest::Approx(kNO_354_7).epsilon(1e-8));
    CHECK(t.n_extraordinary(354.7) == doctest::Approx(kNE_354_7).epsilon(1e-8));
    CHECK(t.source().find("Eimerl") != std::string::npos);
}

TEST_CASE("extraordinary ray at 0 degrees degenerates to the ordinary index") {
    const auto t = bbo();
    for (double lam : {300.0, 354.7, 500.0, 709.4, 1000.0})
        CHECK(t.n_extraordinary_at(lam, 0.0) == doctest::Approx(t.n_ordinary(lam)).epsilon(1e-14));
    CHECK(t.n_extraordinary_at(500.0, 90.0) ==
          doctest::Approx(t.n_extraordinary(500.0)).epsilon(1e-14));
}

TEST_CASE("out-of-range wavelength raises a range error naming the interval") {
    const auto t = bbo();
    CHECK_THROWS_AS(t.n_ordinary(100.0), RangeError);
    CHECK_THROWS_AS(t.n_ordinary(1500.0), RangeError);
    try {
        t.n_ordinary(1500.0);
    } catch (const RangeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("220") != std::string::npos);
        CHECK(msg.find("1060") != std::string::npos);
    }
}

TEST_CASE("ordinary index decreases monotonically over the visible range") {
    const auto t = bbo();
    double prev = t.n_ordinary(400.0);
    for (double lam = 401.0; lam <= 1060.0; lam += 1.0) {
        const double n = t.n_ordinary(lam);
        CHECK(n < prev);
        prev = n;
    }
}

TEST_CASE("conjugate wavelength arithmetic") {
    CHECK(conjugate_wavelength(702.4, 354.7) == doctest::Approx(kConj702_4).epsilon(1e-8));
    CHECK(conjugate_wavelength(709.4, 354.7) == doctest::Approx(709.4).epsilon(1e-12));
    CHECK_THROWS_AS(conjugate_wavelength(354.7, 354.7), DomainError);
    CHECK_THROWS_AS(conjugate_wavelength(300.0, 354.7), DomainError);
}

TEST_CASE("conjugation is an involution over the full validity span") {
    for (double lam = 355.0; lam <= 2000.0; lam += 7.3) {
        const double twice = conjugate_wavelength(conjugate_wavelength(lam, 354.7), 354.7);
        CHECK(std::abs(twice - lam) / lam < 1e-9);
    }
}

TEST_CASE("phase mismatch: frozen value, symmetry, degeneracy") {
    const auto t = bbo();
    const PumpConfig pump;
    const auto c = crystal_at(kTheta0);

    CHECK(phase_mismatch(700.0, t, c, pump) == doctest::Approx(kDk700).epsilon(1e-7));
    CHECK(std::abs(phase_mismatch(709.4, t, c, pump)) < 1e-3);

    // dk(lambda_s) equals dk(conjugate(lambda_s)) through the same code path.
    for (double lam = 660.0; lam < 709.0; lam += 3.7) {
        const double a = phase_mismatch(lam, t, c, pump);
        const double b = phase_mismatch(conjugate_wavelength(lam, pump.wavelength_nm), t, c, pump);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("phase-matching angle: solver vs coarse scan, residual, idempotence") {
    const auto t = bbo();
    const PumpConfig pump;
    CrystalConfig c = crystal_at(30.0);  // cut value is ignored by the solver

    const double theta = find_phasematching_angle(t, c, pump);
    CHECK(std::abs(theta - kTheta0) < 2e-6);

    // Independent bracketing: scan the mismatch sign on a 0.01 degree grid.
    double scan_theta = 0.0;
    double prev = phase_mismatch(709.4, t, crystal_at(1.0), pump);
    for (double a = 1.01; a < 89.0; a += 0.01) {
        const double v = phase_mismatch(709.4, t, crystal_at(a), pump);
        if (std::signbit(v) != std::signbit(prev)) {
            scan_theta = a;
            break;
        }
        prev = v;
    }
    CHECK(std::abs(theta - scan_theta) < 0.01 + 1e-9);

    // Plugged back, the degenerate mismatch is numerically zero.
    c.cut_angle_deg = theta;
    CHECK(std::abs(phase_mismatch(709.4, t, c, pump)) < 0.1);

    // Re-solving from the solution is stable to the solver tolerance.
    const double again = find_phasematching_angle(t, c, pump);
    CHECK(std::abs(again - theta) < 2e-6);
}

TEST_CASE("solver accounts for the orientation offset") {
    const auto t = bbo();
    const PumpConfig pump;
    CrystalConfig c = crystal_at(30.0, 0.0025);
    const double cut = find_phasematching_angle(t, c, pump);
    c.cut_angle_deg = cut;
    CHECK(std::abs(phase_mismatch(709.4, t, c, pump)) < 0.1);
    CHECK(std::abs(cut + c.orientation_offset_deg - kTheta0) < 2e-6);
}

TEST_CASE("solver reports when no phase matching exists") {
    // An isotropic-like table (extraordinary == ordinary) keeps the mismatch
    // strictly positive at every angle, so no bracket exists.
    const auto dir = std::filesystem::temp_directory_path() / "bsv_test_tables";
    std::filesystem::create_directories(dir);
    const auto file = dir / "isotropic.dat";
    {
        std::ofstream out(file);
        out << "source = synthetic isotropic test table\n";
        out << "validity_nm = 220, 1060\n";
        out << "[ordinary]\na = 2.7405\nb = 0.0184\nc = 0.0179\nd = 0.0155\n";
        out << "[extraordinary]\na = 2.7405\nb = 0.0184\nc = 0.0179\nd = 0.0155\n";
    }
    const auto t = DispersionTable::load(file.string());
    CHECK_THROWS_AS(find_phasematching_angle(t, crystal_at(30.0), PumpConfig{}), NumericError);
}

TEST_CASE("dispersion table validation") {
    CHECK_THROWS_AS(DispersionTable::load("no_such_table"), ConfigError);
}
