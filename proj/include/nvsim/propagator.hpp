#pragma once

// Exact evolution of the population vector under a constant generator.
//
// The emitted-photon integrals ride along as two extra rows of an augmented
// 10x10 generator:
//
//     d/dt [p; red; ir] = [[M, 0], [e_red^T, 0], [e_ir^T, 0]] [p; red; ir]
//
// so one matrix exponential yields both exp(M dt) p and the integrals of the
// emission rates over [0, dt], without quadrature.

#include "nvsim/error.hpp"
#include "nvsim/model.hpp"

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace nvsim {

inline constexpr double kPopulationTolerance = 1e-9;

struct PopulationState {
    Vector8 p = Vector8::Zero();

    static PopulationState unit(Level level)
    {
        PopulationState s;
        s.p[index(level)] = 1.0;
        return s;
    }

    double operator[](Level level) const { return p[index(level)]; }
    double& operator[](Level level) { return p[index(level)]; }

    double total() const { return p.sum(); }
    double negative_charge() const { return p.head<6>().sum(); }
    double neutral_charge() const { return p.tail<2>().sum(); }

    void validate() const
    {
        detail::require(p.allFinite(), "population vector has non-finite components");
        for (Level level : kAllLevels) {
            const double v = (*this)[level];
            detail::require(v >= -kPopulationTolerance && v <= 1.0 + kPopulationTolerance,
                            "population of " + std::string(level_name(level)) + " outside [0, 1]");
        }
        detail::require(std::abs(total() - 1.0) <= kPopulationTolerance, "populations do not sum to 1");
    }

    /// Copy with round-off negatives set to zero; for reporting only.
    PopulationState clamped() const
    {
        PopulationState s = *this;
        s.p = s.p.cwiseMax(0.0);
        return s;
    }

    bool operator==(const PopulationState&) const = default;
};

/// Expected emitted photons per detection channel.
struct EmissionAccumulator {
    double red = 0.0;
    double ir = 0.0;

    EmissionAccumulator& operator+=(const EmissionAccumulator& other)
    {
        red += other.red;
        ir += other.ir;
        return *this;
    }

    bool operator==(const EmissionAccumulator&) const = default;
};

struct Propagation {
    PopulationState state;
    EmissionAccumulator emitted;
};

using Matrix10 = Eigen::Matrix<double, 10, 10>;

/// exp(A dt) of the augmented generator for one constant segment. Reusable
/// across repetitions of the same segment.
class SegmentPropagator {
public:
    SegmentPropagator(const GeneratorMatrix& gen, double dt)
    {
        if (!(dt >= 0.0) || !std::isfinite(dt)) {
            throw ValidationError("propagation duration must be finite and >= 0 (got " + std::to_string(dt) + ")");
        }
        if (!gen.all_finite()) {
            throw NumericError("generator contains non-finite entries");
        }
        if (dt == 0.0) {
            exp_.setIdentity();
            return;
        }
        Matrix10 a = Matrix10::Zero();
        a.topLeftCorner<8, 8>() = gen.entries * dt;
        a.block<1, 8>(8, 0) = gen.red_emission.transpose() * dt;
        a.block<1, 8>(9, 0) = gen.ir_emission.transpose() * dt;
        exp_ = a.exp();
        if (!exp_.allFinite()) {
            throw NumericError("matrix exponential overflowed");
        }
    }

    Propagation apply(const PopulationState& state) const
    {
        Propagation out;
        out.state.p = exp_.topLeftCorner<8, 8>() * state.p;
        out.emitted.red = exp_.block<1, 8>(8, 0).dot(state.p);
        out.emitted.ir = exp_.block<1, 8>(9, 0).dot(state.p);
        return out;
    }

    const Matrix10& matrix() const noexcept { return exp_; }

private:
    Matrix10 exp_;
};

inline Propagation propagate_exact(const PopulationState& state, const GeneratorMatrix& gen, double dt)
{
    return SegmentPropagator(gen, dt).apply(state);
}

struct TraceSample {
    double t_us = 0.0;
    PopulationState state;
    EmissionAccumulator cumulative;
};

/// n_samples equally spaced snapshots over [0, dt]. Each snapshot is one exact
/// propagation from the initial state, so the last one is bit-identical to
/// propagate_exact(state, gen, dt).
inline std::vector<TraceSample> propagate_trace(const PopulationState& state, const GeneratorMatrix& gen, double dt,
                                                std::size_t n_samples)
{
    detail::require(n_samples >= 2, "trace needs at least 2 samples");
    std::vector<TraceSample> out;
    out.reserve(n_samples);
    out.push_back({0.0, state, {}});
    for (std::size_t k = 1; k < n_samples; ++k) {
        const double t = (k + 1 == n_samples) ? dt : dt * static_cast<double>(k) / static_cast<double>(n_samples - 1);
        const Propagation step = propagate_exact(state, gen, t);
        out.push_back({t, step.state, step.emitted});
    }
    return out;
}

/// Normalized null vector of the generator.
inline PopulationState steady_state(const GeneratorMatrix& gen, double relative_tolerance = 1e-12)
{
    if (!gen.all_finite()) {
        throw NumericError("generator contains non-finite entries");
    }
    const Matrix8& m = gen.entries;
    Eigen::JacobiSVD<Matrix8> svd(m);
    const Vector8& sv = svd.singularValues(); // descending
    const double scale = sv[0];
    if (scale == 0.0) {
        throw NonUniqueSteadyState("generator is identically zero; every state is stationary");
    }
    if (sv[kLevelCount - 2] <= relative_tolerance * scale) {
        throw NonUniqueSteadyState("generator null space has dimension > 1 (second-smallest singular value " +
                                   std::to_string(sv[kLevelCount - 2]) + ")");
    }

    // Replace one conservation-redundant equation by sum(p) = 1.
    Matrix8 a = m;
    a.row(kLevelCount - 1).setOnes();
    Vector8 rhs = Vector8::Zero();
    rhs[kLevelCount - 1] = 1.0;
    Eigen::FullPivLU<Matrix8> lu(a);
    if (!lu.isInvertible()) {
        // The dropped row carried information; fall back to the SVD null vector.
        Vector8 v = svd.matrixV().col(kLevelCount - 1);
        v /= v.sum();
        PopulationState s;
        s.p = v;
        return s;
    }
    PopulationState s;
    s.p = lu.solve(rhs);
    s.p = s.p.cwiseMax(0.0);
    s.p /= s.p.sum();
    return s;
}

/// One Poisson draw of detected photons around the expected counts.
struct PhotonCounts {
    std::uint64_t red = 0;
    std::uint64_t ir = 0;
};

template <class Rng>
PhotonCounts sample_counts(const EmissionAccumulator& expected, Rng& rng, double efficiency = 1.0)
{
    detail::require(efficiency >= 0.0 && efficiency <= 1.0, "efficiency must lie in [0, 1]");
    auto draw = [&](double mean) -> std::uint64_t {
        if (mean <= 0.0) return 0;
        std::poisson_distribution<std::uint64_t> dist(mean);
        return dist(rng);
    };
    return {draw(expected.red * efficiency), draw(expected.ir * efficiency)};
}

inline constexpr const char* kTraceCsvHeader =
    "t_us, p_g0, p_g1, p_e0, p_e1, p_se, p_sg, p_n_g, p_n_e, red_cum, ir_cum";

inline void write_trace_csv(std::ostream& os, const std::vector<TraceSample>& samples)
{
    os << kTraceCsvHeader << '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& s : samples) {
        put(s.t_us);
        const PopulationState shown = s.state.clamped();
        for (Level level : kAllLevels) {
            os << ", ";
            put(shown[level]);
        }
        os << ", ";
        put(s.cumulative.red);
        os << ", ";
        put(s.cumulative.ir);
        os << '\n';
    }
}

} // namespace nvsim
