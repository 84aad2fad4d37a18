// Serial reference vs OpenMP kernels on synthetic path sets.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "robmot/kernels.hpp"

using namespace robmot;

namespace {

struct Paths {
    std::vector<double> prior, base, nu;
    Eigen::MatrixXd F;
    Eigen::VectorXd z;
};

const Paths& paths(std::size_t n) {
    static std::map<std::size_t, Paths> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Paths d;
    d.prior.resize(n);
    d.base.resize(n);
    d.nu.resize(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += d.prior[i] = 1.0 + 0.5 * u(rng);
        d.base[i] = u(rng);
        d.nu[i] = d.prior[i] * (1.0 + 0.5 * u(rng));
    }
    for (double& p : d.prior) p /= s;
    for (double& v : d.nu) v /= s;
    const Eigen::Index dim = 16;
    d.F = Eigen::MatrixXd::NullaryExpr(static_cast<Eigen::Index>(n), dim, [&]() { return u(rng); });
    d.z = Eigen::VectorXd::NullaryExpr(dim, [&]() { return 0.2 * u(rng); });
    return cache.emplace(n, std::move(d)).first->second;
}

template <bool Parallel>
void utility(benchmark::State& st) {
    const auto& d = paths(static_cast<std::size_t>(st.range(0)));
    const auto util = UtilitySpec::entropic_quadratic(0.5);
    kernels::UtilityInput in{&util, d.prior, d.base, &d.F};
    for (auto _ : st) {
        auto m = Parallel ? kernels::parallel::utility_moments(in, d.z, true) : kernels::serial::utility_moments(in, d.z, true);
        benchmark::DoNotOptimize(m.value);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void perspective(benchmark::State& st) {
    const auto& d = paths(static_cast<std::size_t>(st.range(0)));
    const auto spec = IntegrandSpec::from_utility(UtilitySpec::exponential());
    for (auto _ : st) {
        auto t = Parallel ? kernels::parallel::perspective(spec, d.nu, d.prior, true)
                          : kernels::serial::perspective(spec, d.nu, d.prior, true);
        benchmark::DoNotOptimize(t.value);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(utility<false>)->Name("utility_moments/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(utility<true>)->Name("utility_moments/parallel")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(perspective<false>)->Name("perspective/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(perspective<true>)->Name("perspective/parallel")->RangeMultiplier(8)->Range(64, 1 << 18);

BENCHMARK_MAIN();
