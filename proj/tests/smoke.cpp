#include <cassert>
#include <cmath>
#include <cstdio>

#include "gridbid/bids.hpp"
#include "gridbid/value.hpp"
#include "gridbid/withhold.hpp"

using namespace gridbid;

int main() {
    StorageSpec spec{.power_mw = 10, .energy_mwh = 40, .efficiency = 0.9, .marginal_cost = 25,
                     .step_hours = 1.0};

    // q_zero_soc worked cases
    std::printf("q0(10) = %.6f (want 20)\n", q_zero_soc(10, 20, 40, spec));
    std::printf("q0(30) = %.6f (want 33.3333)\n", q_zero_soc(30, 20, 40, spec));
    std::printf("q0(100) = %.6f (want 67.5)\n", q_zero_soc(100, 20, 40, spec));

    // bellman against the spike example: v(E_c)=20 marginal, v(0)=40, kink below E_c
    ValueFunction vf_next = ValueFunction::from_slopes({0.0, 5.0, 40.0}, std::array{40.0, 20.0});
    auto dist = PriceDistribution::two_point(450.0, -397.6, 0.5);
    std::printf("two-point mean = %.6f (want 26.2)\n", dist.mean());
    auto v = bellman_step(vf_next, dist, spec, {.grid_points = 801});
    std::printf("v_t(0) = %.6f (want 201.25)\n", v.marginal(0.0));
    std::printf("concavity violation = %.3e\n", v.concavity_violation());

    // theorem2 single-step worked case
    auto bb = theorem2_bound(1, 2, std::array{26.2, 26.2}, {5.0, 150.0}, spec, 0.0);
    std::printf("theorem2 t=T-1 bound = %.6f (want 43.2759)\n", bb.bound);

    // gaussian sanity: sigma->0 equals point mass
    auto g0 = bellman_step(vf_next, PriceDistribution::gaussian(26.2, 1e-9), spec, {.grid_points = 101});
    auto p0 = bellman_step(vf_next, PriceDistribution::point_mass(26.2), spec, {.grid_points = 101});
    double worst = 0;
    for (size_t i = 0; i < g0.values().size(); ++i)
        worst = std::max(worst, std::abs(g0.values()[i] - p0.values()[i]));
    std::printf("gaussian sigma->0 vs point mass: %.3e\n", worst);

    // discharge bid staircase across a kink
    ValueFunction kinked = ValueFunction::from_slopes({0.0, 10.0, 40.0}, std::array{40.0, 20.0});
    auto curve = discharge_bids(kinked, 12.0, spec, 10);
    std::printf("discharge prices:");
    for (auto& s : curve.segments) std::printf(" %.4f", s.price);
    std::printf("\n(want first 47.22 then 69.44 once SoC crosses 10)\n");
    return 0;
}
