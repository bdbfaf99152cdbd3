// Serial reference kernels against the OpenMP versions.
#include <benchmark/benchmark.h>

#include <numeric>

#include "robust_thresh/kernels.hpp"
#include "robust_thresh/rng.hpp"

using namespace rthresh;

namespace {

struct Problem {
    MatrixXd X, Y, W;
    std::vector<std::size_t> idx;
    std::vector<double> zeta;
};

Problem make_problem(std::size_t n, std::size_t d) {
    Problem p;
    CounterStream rng(1, StreamTag::Lab, 0);
    const auto N = static_cast<Eigen::Index>(n), D = static_cast<Eigen::Index>(d);
    p.X.resize(D, N);
    p.Y.resize(1, N);
    p.W.resize(1, D);
    for (Eigen::Index i = 0; i < p.X.size(); ++i) p.X.data()[i] = rng.next_normal();
    for (Eigen::Index i = 0; i < N; ++i) p.Y(0, i) = rng.next_normal();
    for (Eigen::Index i = 0; i < D; ++i) p.W(0, i) = rng.next_normal();
    p.idx.resize(n - n / 10);
    std::iota(p.idx.begin(), p.idx.end(), std::size_t{0});
    p.zeta.resize(n);
    for (double& z : p.zeta) z = rng.next_unit();
    return p;
}

const ActivationSpec kAct = ActivationSpec::sigmoid();

template <bool Parallel>
void BM_Losses(benchmark::State& state) {
    const Problem p = make_problem(static_cast<std::size_t>(state.range(0)), 20);
    std::vector<double> out(p.zeta.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::per_sample_losses(p.W, kAct, p.X, p.Y, out);
        else
            kernels::serial::per_sample_losses(p.W, kAct, p.X, p.Y, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_Gradient(benchmark::State& state) {
    const Problem p = make_problem(static_cast<std::size_t>(state.range(0)), 20);
    for (auto _ : state) {
        MatrixXd g = Parallel ? kernels::parallel::weighted_gradient(p.W, kAct, p.X, p.Y, p.idx, 1.0)
                              : kernels::serial::weighted_gradient(p.W, kAct, p.X, p.Y, p.idx, 1.0);
        benchmark::DoNotOptimize(g.data());
    }
}

template <bool Parallel>
void BM_SecondMoment(benchmark::State& state) {
    const Problem p = make_problem(static_cast<std::size_t>(state.range(0)), 20);
    for (auto _ : state) {
        MatrixXd m = Parallel ? kernels::parallel::second_moment(p.X, p.idx) : kernels::serial::second_moment(p.X, p.idx);
        benchmark::DoNotOptimize(m.data());
    }
}

template <bool Parallel>
void BM_SmallestK(benchmark::State& state) {
    const Problem p = make_problem(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        auto s = Parallel ? kernels::parallel::smallest_k(p.zeta, p.idx.size())
                          : kernels::serial::smallest_k(p.zeta, p.idx.size());
        benchmark::DoNotOptimize(s.data());
    }
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Losses, false)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_Losses, true)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_Gradient, false)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_Gradient, true)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_SecondMoment, false)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_SecondMoment, true)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_SmallestK, false)->Arg(5000)->Arg(100000);
BENCHMARK_TEMPLATE(BM_SmallestK, true)->Arg(5000)->Arg(100000);

BENCHMARK_MAIN();
