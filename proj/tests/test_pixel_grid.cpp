#include "arrayhd/pixel_grid.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace arrayhd;

namespace {

PixelGrid unit_grid(int n) { return PixelGrid(n, n, 1.0 / n, 1.0 / n); }

double discrete_norm2(const PixelGrid& grid, const Vector& raw) {
    return grid.pixel_area() * raw.squaredNorm();
}

}  // namespace

TEST_CASE("pixel grid geometry") {
    PixelGrid grid(16, 8, 0.25, 0.5);
    CHECK(grid.width() == doctest::Approx(4.0));
    CHECK(grid.height() == doctest::Approx(4.0));
    CHECK(grid.pixel_count() == 128);
    CHECK(grid.x_center(0) == doctest::Approx(-2.0 + 0.125));
    CHECK(grid.y_center(7) == doctest::Approx(2.0 - 0.25));
    CHECK_THROWS_AS(PixelGrid(0, 4, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(PixelGrid(4, 4, -0.1, 0.1), std::invalid_argument);
    CHECK(unit_grid(16).hash() != unit_grid(17).hash());
}

TEST_CASE("uniform LO mode") {
    SUBCASE("1x1 grid") {
        PixelGrid grid(1, 1, 1.0, 1.0);
        ModeFunction lo = uniform_lo_mode(grid);
        CHECK(lo.value(0, 0) == Complex(1.0, 0.0));
    }
    SUBCASE("16x16 grid with quarter pixels") {
        PixelGrid grid(16, 16, 0.25, 0.25);
        ModeFunction lo = uniform_lo_mode(grid);
        for (int j : {0, 5, 15}) {
            for (int jp : {0, 9, 15}) {
                CHECK(std::abs(lo.value(j, jp) - Complex(0.25, 0.0)) < 1e-15);
            }
        }
    }
    SUBCASE("normalization is exact") {
        PixelGrid grid = unit_grid(16);
        ModeFunction lo = uniform_lo_mode(grid);
        CHECK(std::abs(overlap(lo, lo) - Complex(1.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("gram-schmidt orthonormalization") {
    PixelGrid grid = unit_grid(16);
    ModeParams p;
    p.waist = 0.25;

    SUBCASE("already orthonormal input is unchanged") {
        ModeBasis first = gram_schmidt(
            {sample_hermite_gauss(grid, 0, 0, p), sample_hermite_gauss(grid, 1, 0, p)}, grid);
        std::vector<Vector> again = {first.mode(0).values(), first.mode(1).values()};
        ModeBasis second = gram_schmidt(again, grid);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK((second.mode(i).values() - first.mode(i).values()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("overlapping gaussian bumps orthonormalize") {
        ModeParams left = p, right = p;
        left.center_x = -0.1;
        right.center_x = 0.1;
        ModeBasis basis = gram_schmidt(
            {sample_hermite_gauss(grid, 0, 0, left), sample_hermite_gauss(grid, 0, 0, right)}, grid);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t k = 0; k < 2; ++k) {
                const Complex expected = (i == k) ? Complex(1.0) : Complex(0.0);
                CHECK(std::abs(overlap(basis.mode(i), basis.mode(k)) - expected) < 1e-10);
            }
        }
    }
    SUBCASE("duplicate field reports rank deficiency at index 1") {
        Vector f = sample_hermite_gauss(grid, 0, 0, p);
        CHECK_THROWS_WITH_AS(gram_schmidt({f, f}, grid),
                             doctest::Contains("rank deficiency at index 1"),
                             std::invalid_argument);
    }
    SUBCASE("order is preserved") {
        Vector a = sample_hermite_gauss(grid, 0, 0, p);
        Vector b = sample_hermite_gauss(grid, 1, 0, p);
        ModeBasis basis = gram_schmidt({a, b}, grid);
        // first output spans the first input
        ModeFunction a_mode(grid, a);
        CHECK(std::abs(std::abs(overlap(basis.mode(0), a_mode)) - 1.0) < 1e-12);
    }
}

TEST_CASE("mode families") {
    PixelGrid grid = unit_grid(16);
    ModeParams p;
    p.waist = 0.25;

    SUBCASE("hermite-gauss(0,0) is a real positive bump") {
        Vector f = sample_hermite_gauss(grid, 0, 0, p);
        for (int i = 0; i < f.size(); ++i) {
            CHECK(f(i).imag() == 0.0);
            CHECK(f(i).real() > 0.0);
        }
    }
    SUBCASE("vortex phase winds by 2*pi around the center") {
        Vector f = sample_vortex(grid, 1, p);
        // counterclockwise square loop of pixel indices around the grid center
        std::vector<std::pair<int, int>> loop;
        for (int j = 5; j <= 10; ++j) loop.push_back({j, 5});
        for (int jp = 6; jp <= 10; ++jp) loop.push_back({10, jp});
        for (int j = 9; j >= 5; --j) loop.push_back({j, 10});
        for (int jp = 9; jp >= 6; --jp) loop.push_back({5, jp});
        double winding = 0.0;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const auto [j0, k0] = loop[i];
            const auto [j1, k1] = loop[(i + 1) % loop.size()];
            winding += std::arg(f(grid.index(j1, k1)) / f(grid.index(j0, k0)));
        }
        CHECK(winding == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
    }
    SUBCASE("vortex amplitude vanishes toward the singular pixel neighborhood") {
        auto center_ratio = [&](int n) {
            PixelGrid g = unit_grid(n);
            Vector f = sample_vortex(g, 1, p);
            const double peak = f.cwiseAbs().maxCoeff();
            double center = 0.0;
            for (int j : {n / 2 - 1, n / 2}) {
                for (int jp : {n / 2 - 1, n / 2}) {
                    center = std::max(center, std::abs(f(g.index(j, jp))));
                }
            }
            return center / peak;
        };
        CHECK(center_ratio(64) < 0.15);
        CHECK(center_ratio(256) < 0.05);
        CHECK(center_ratio(256) < center_ratio(16));
    }
    SUBCASE("vortex fields are genuinely complex") {
        Vector f = sample_vortex(grid, 1, p);
        CHECK(f.imag().cwiseAbs().maxCoeff() > 0.1 * f.cwiseAbs().maxCoeff());
    }
    SUBCASE("constant field is proportional to the uniform LO mode") {
        Vector f = sample_constant(grid);
        ModeFunction normalized(grid, f);
        ModeFunction lo = uniform_lo_mode(grid);
        CHECK((normalized.values() - lo.values()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("unknown family") {
        CHECK_THROWS_AS(sample_mode(grid, "laguerre", p), std::invalid_argument);
        CHECK_NOTHROW(sample_mode(grid, "hermite-gauss", p));
        CHECK_NOTHROW(sample_mode(grid, "vortex", p));
        CHECK_NOTHROW(sample_mode(grid, "constant", p));
    }
}

TEST_CASE("overlap") {
    PixelGrid grid = unit_grid(16);
    ModeParams p;
    p.waist = 0.25;
    ModeBasis basis = gram_schmidt(
        {sample_hermite_gauss(grid, 0, 0, p), sample_hermite_gauss(grid, 1, 0, p)}, grid);

    SUBCASE("self-overlap of a normalized mode is 1") {
        CHECK(std::abs(overlap(basis.mode(0), basis.mode(0)) - Complex(1.0)) < 1e-12);
    }
    SUBCASE("orthonormal members have zero overlap") {
        CHECK(std::abs(overlap(basis.mode(0), basis.mode(1))) < 1e-10);
    }
    SUBCASE("vortex mode is orthogonal to the uniform LO") {
        ModeFunction vortex(grid, sample_vortex(grid, 1, p));
        CHECK(std::abs(overlap(vortex, uniform_lo_mode(grid))) < 1e-10);
    }
    SUBCASE("conjugate symmetry") {
        ModeFunction vortex(grid, sample_vortex(grid, 1, p));
        const Complex ab = overlap(basis.mode(0), vortex);
        const Complex ba = overlap(vortex, basis.mode(0));
        CHECK(ab.real() == std::conj(ba).real());
        CHECK(ab.imag() == std::conj(ba).imag());
    }
    SUBCASE("grid mismatch") {
        PixelGrid other = unit_grid(8);
        CHECK_THROWS_AS(overlap(basis.mode(0), uniform_lo_mode(other)), std::invalid_argument);
    }
}

TEST_CASE("discrete norm is stable under grid refinement") {
    ModeParams p;
    p.waist = 0.25;
    const PixelGrid coarse = unit_grid(16);
    const PixelGrid fine = unit_grid(32);
    const double n_coarse = discrete_norm2(coarse, sample_hermite_gauss(coarse, 0, 0, p));
    const double n_fine = discrete_norm2(fine, sample_hermite_gauss(fine, 0, 0, p));
    CHECK(std::abs(n_fine - n_coarse) / n_coarse < 1e-3);
}

TEST_CASE("mode csv round trip") {
    PixelGrid grid = unit_grid(8);
    ModeParams p;
    p.waist = 0.25;
    Vector f = sample_vortex(grid, 1, p);
    const std::string path =
        (std::filesystem::temp_directory_path() / "arrayhd_mode_roundtrip.csv").string();
    write_mode_csv(path, grid, f);
    Vector g = read_mode_csv(path, grid);
    CHECK((f - g).cwiseAbs().maxCoeff() == 0.0);  // %.17g round-trips doubles exactly
    std::filesystem::remove(path);
}
