#include "chdbc/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>
#include <fmt/format.h>

#include "chdbc/errors.hpp"

namespace chdbc {

namespace {

// The FFTW planner is not re-entrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

} // namespace

struct EllipticWorkspace::Impl {
    int n = 0;
    int modes = 0; // N/2 + 1 retained real-FFT modes
    fftw_plan bulk_forward = nullptr;
    fftw_plan bulk_backward = nullptr;
    fftw_plan wall_forward = nullptr;
    fftw_plan wall_backward = nullptr;
    // LDL^T of the w-scaled y-system per mode k >= 1: pivots and multipliers.
    std::vector<std::vector<double>> pivot;
    std::vector<std::vector<double>> mult;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        for (fftw_plan p : {bulk_forward, bulk_backward, wall_forward, wall_backward}) {
            if (p) fftw_destroy_plan(p);
        }
    }
};

EllipticWorkspace::EllipticWorkspace(const Mesh& mesh) : mesh_(mesh), impl_(std::make_unique<Impl>()) {
    const int n = mesh.n();
    const double h = mesh.h();
    const double inv_h2 = 1.0 / (h * h);
    lambda_.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        lambda_[static_cast<std::size_t>(k)] =
            (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k * h)) * inv_h2;
    }
    lambda_[0] = 0.0;

    Impl& im = *impl_;
    im.n = n;
    im.modes = n / 2 + 1;
    const auto rows = static_cast<std::size_t>(n + 1);
    const auto modes = static_cast<std::size_t>(im.modes);

    {
        std::lock_guard lock(planner_mutex());
        auto rin = alloc_real(rows * static_cast<std::size_t>(n));
        auto cout = alloc_complex(rows * modes);
        int len = n;
        im.bulk_forward = fftw_plan_many_dft_r2c(1, &len, n + 1, rin.get(), nullptr, 1, n,
                                                 cout.get(), nullptr, 1, im.modes, FFTW_ESTIMATE);
        im.bulk_backward = fftw_plan_many_dft_c2r(1, &len, n + 1, cout.get(), nullptr, 1, im.modes,
                                                  rin.get(), nullptr, 1, n, FFTW_ESTIMATE);
        im.wall_forward = fftw_plan_dft_r2c_1d(n, rin.get(), cout.get(), FFTW_ESTIMATE);
        im.wall_backward = fftw_plan_dft_c2r_1d(n, cout.get(), rin.get(), FFTW_ESTIMATE);
    }
    if (!im.bulk_forward || !im.bulk_backward || !im.wall_forward || !im.wall_backward) {
        throw SolverFailure("FFTW planning failed for N=" + std::to_string(n));
    }

    // w_j (lambda_k + T_y): diagonal w_j lambda_k + (1/h^2 at walls, 2/h^2 inside),
    // off-diagonal -1/h^2. Symmetric positive definite for k >= 1.
    im.pivot.assign(modes, {});
    im.mult.assign(modes, {});
    const double off = -inv_h2;
    for (std::size_t k = 1; k < modes; ++k) {
        auto& d = im.pivot[k];
        auto& l = im.mult[k];
        d.resize(rows);
        l.resize(rows - 1);
        for (int j = 0; j <= n; ++j) {
            const double w = mesh.weight(j);
            const double diag = w * lambda_[k] + ((j == 0 || j == n) ? inv_h2 : 2.0 * inv_h2);
            const auto uj = static_cast<std::size_t>(j);
            d[uj] = (j == 0) ? diag : diag - off * l[uj - 1];
            if (j < n) l[uj] = off / d[uj];
        }
    }
}

EllipticWorkspace::~EllipticWorkspace() = default;

const EllipticWorkspace& EllipticWorkspace::for_mesh(const Mesh& mesh) {
    static std::mutex m;
    static std::map<int, std::unique_ptr<EllipticWorkspace>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[mesh.n()];
    if (!slot) slot = std::make_unique<EllipticWorkspace>(mesh);
    return *slot;
}

BulkField EllipticWorkspace::solve_Lh(const BulkField& f) const {
    require_same_mesh(mesh_, f.mesh());
    const double m = mean(f);
    if (std::abs(m) > kMeanTolerance) {
        throw NonZeroMean(fmt::format("solve_Lh: weighted mean {:.3e} exceeds {:.0e}", m,
                                      kMeanTolerance));
    }
    BulkField rhs = f;
    for (double& x : rhs.values()) x -= m;

    const Impl& im = *impl_;
    const int n = im.n;
    const double h2 = mesh_.h() * mesh_.h();
    const auto un = static_cast<std::size_t>(n);
    const auto rows = un + 1;
    const auto modes = static_cast<std::size_t>(im.modes);

    auto rbuf = alloc_real(rows * un);
    auto cbuf = alloc_complex(rows * modes);
    std::copy(rhs.values().begin(), rhs.values().end(), rbuf.get());
    fftw_execute_dft_r2c(im.bulk_forward, rbuf.get(), cbuf.get());

    auto at = [&](std::size_t j, std::size_t k) -> fftw_complex& { return cbuf[j * modes + k]; };

    // k = 0: singular Neumann problem. The flux q_j = (psi_{j+1} - psi_j)/h^2
    // is a prefix sum of the w-scaled right side; the constant is fixed below.
    {
        double psi = 0.0;
        double flux = 0.0;
        for (std::size_t j = 0; j < rows; ++j) {
            const double b = mesh_.weight(static_cast<int>(j)) * at(j, 0)[0];
            const double current = psi;
            flux -= b;
            psi = current + h2 * flux;
            at(j, 0)[0] = current;
            at(j, 0)[1] = 0.0;
        }
    }

    std::vector<std::complex<double>> y(rows);
    for (std::size_t k = 1; k < modes; ++k) {
        const auto& d = im.pivot[k];
        const auto& l = im.mult[k];
        for (std::size_t j = 0; j < rows; ++j) {
            const double w = mesh_.weight(static_cast<int>(j));
            std::complex<double> b(w * at(j, k)[0], w * at(j, k)[1]);
            if (j > 0) b -= l[j - 1] * y[j - 1];
            y[j] = b;
        }
        for (std::size_t j = 0; j < rows; ++j) y[j] /= d[j];
        for (std::size_t j = rows - 1; j-- > 0;) y[j] -= l[j] * y[j + 1];
        for (std::size_t j = 0; j < rows; ++j) {
            at(j, k)[0] = y[j].real();
            at(j, k)[1] = y[j].imag();
        }
    }

    fftw_execute_dft_c2r(im.bulk_backward, cbuf.get(), rbuf.get());
    std::vector<double> values(rbuf.get(), rbuf.get() + rows * un);
    const double scale = 1.0 / static_cast<double>(n);
    for (double& x : values) x *= scale;
    BulkField psi(mesh_, std::move(values));
    const double psi_mean = mean(psi);
    for (double& x : psi.values()) x -= psi_mean;

    // Scale by the input, not the centered rhs: a tiny constant f centers to roundoff.
    const double rhs_norm = std::sqrt(norm2_sq(f));
    const double res = std::sqrt(norm2_sq(apply_Lh(psi) - rhs));
    if (res > kResidualTolerance * rhs_norm) {
        throw SolverFailure(fmt::format("solve_Lh: residual {:.3e} vs |f| {:.3e}", res, rhs_norm));
    }
    return psi;
}

BoundaryField EllipticWorkspace::solve_dx2_gamma(const BoundaryField& f) const {
    require_same_mesh(mesh_, f.mesh());
    const double m = boundary_mean(f);
    if (std::abs(m) > kMeanTolerance) {
        throw NonZeroMean(fmt::format("solve_dx2_gamma: mean {:.3e} exceeds {:.0e}", m,
                                      kMeanTolerance));
    }
    BoundaryField rhs = f;
    for (double& x : rhs.values()) x -= m;

    const Impl& im = *impl_;
    const auto un = static_cast<std::size_t>(im.n);
    const auto modes = static_cast<std::size_t>(im.modes);
    auto rbuf = alloc_real(un);
    auto cbuf = alloc_complex(modes);
    std::copy(rhs.values().begin(), rhs.values().end(), rbuf.get());
    fftw_execute_dft_r2c(im.wall_forward, rbuf.get(), cbuf.get());
    cbuf[0][0] = 0.0;
    cbuf[0][1] = 0.0;
    for (std::size_t k = 1; k < modes; ++k) {
        cbuf[k][0] /= lambda_[k];
        cbuf[k][1] /= lambda_[k];
    }
    fftw_execute_dft_c2r(im.wall_backward, cbuf.get(), rbuf.get());
    std::vector<double> values(rbuf.get(), rbuf.get() + un);
    for (double& x : values) x /= static_cast<double>(im.n);
    BoundaryField psi(mesh_, std::move(values));
    const double psi_mean = boundary_mean(psi);
    for (double& x : psi.values()) x -= psi_mean;

    const double rhs_norm = std::sqrt(boundary_norm2_sq(f));
    const double res = std::sqrt(boundary_norm2_sq(-1.0 * dx2_gamma(psi) - rhs));
    if (res > kResidualTolerance * rhs_norm) {
        throw SolverFailure(
            fmt::format("solve_dx2_gamma: residual {:.3e} vs |f| {:.3e}", res, rhs_norm));
    }
    return psi;
}

double EllipticWorkspace::factorization_probe_error() const {
    double worst = 0.0;
    const int n = mesh_.n();
    for (int k = 0; k <= n / 2; ++k) {
        const auto g = BulkField::sample(mesh_, [k](double x, double y) {
            return std::cos(2.0 * std::numbers::pi * k * x) * std::cos(std::numbers::pi * y);
        });
        const BulkField back = solve_Lh(apply_Lh(g));
        const double err = std::sqrt(norm2_sq(back - g) / norm2_sq(g));
        worst = std::max(worst, err);
    }
    return worst;
}

BulkField solve_Lh(const BulkField& f) { return EllipticWorkspace::for_mesh(f.mesh()).solve_Lh(f); }

double hminus1_norm(const BulkField& f) {
    const BulkField psi = solve_Lh(f);
    return std::sqrt(std::max(0.0, inner(f, psi)));
}

BoundaryField solve_dx2_gamma(const BoundaryField& f) {
    return EllipticWorkspace::for_mesh(f.mesh()).solve_dx2_gamma(f);
}

double hminus1_gamma_norm(const BoundaryField& f) {
    const BoundaryField psi = solve_dx2_gamma(f);
    return std::sqrt(std::max(0.0, boundary_inner(f, psi)));
}

} // namespace chdbc
