#include <doctest.h>

#include <omp.h>

#include <numeric>

#include "robust_thresh/kernels.hpp"
#include "robust_thresh/rng.hpp"

using namespace rthresh;

namespace {
MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t stream) {
    CounterStream rng(77, StreamTag::Lab, stream);
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.next_normal();
    return m;
}
}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
    const MatrixXd X = random_matrix(7, 3001, 0), Y = random_matrix(2, 3001, 1), W = random_matrix(2, 7, 2);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 3001; i += 3) idx.push_back(i);
    for (const auto& act : {ActivationSpec::linear(), ActivationSpec::sigmoid(), ActivationSpec::leaky_relu(0.1),
                            ActivationSpec::smooth_leaky_relu(0.3)}) {
        std::vector<double> a(3001), b(3001);
        kernels::serial::per_sample_losses(W, act, X, Y, a);
        kernels::parallel::per_sample_losses(W, act, X, Y, b);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-13));
        const MatrixXd gs = kernels::serial::weighted_gradient(W, act, X, Y, idx, 0.5);
        const MatrixXd gp = kernels::parallel::weighted_gradient(W, act, X, Y, idx, 0.5);
        CHECK((gs - gp).norm() <= 1e-12 * gs.norm());
    }
    const MatrixXd ms = kernels::serial::second_moment(X, idx), mp = kernels::parallel::second_moment(X, idx);
    CHECK((ms - mp).norm() <= 1e-12 * ms.norm());
    MatrixXd direct = MatrixXd::Zero(7, 7);
    for (std::size_t i : idx) direct += X.col(static_cast<Eigen::Index>(i)) * X.col(static_cast<Eigen::Index>(i)).transpose();
    CHECK((direct / static_cast<double>(idx.size()) - ms).norm() <= 1e-12 * ms.norm());
}

TEST_CASE("parallel kernels are bitwise independent of thread count") {
    const MatrixXd X = random_matrix(5, 4000, 3), Y = random_matrix(1, 4000, 4), W = random_matrix(1, 5, 5);
    std::vector<std::size_t> idx(3500);
    std::iota(idx.begin(), idx.end(), std::size_t{200});
    const ActivationSpec act = ActivationSpec::tanh();
    omp_set_num_threads(1);
    const MatrixXd g1 = kernels::parallel::weighted_gradient(W, act, X, Y, idx, 1.0);
    const MatrixXd m1 = kernels::parallel::second_moment(X, idx);
    omp_set_num_threads(3);
    const MatrixXd g3 = kernels::parallel::weighted_gradient(W, act, X, Y, idx, 1.0);
    const MatrixXd m3 = kernels::parallel::second_moment(X, idx);
    MatrixXd g_nested, m_nested;
#pragma omp parallel num_threads(2)
    {
#pragma omp single
        {
            g_nested = kernels::parallel::weighted_gradient(W, act, X, Y, idx, 1.0);
            m_nested = kernels::parallel::second_moment(X, idx);
        }
    }
    omp_set_num_threads(omp_get_num_procs());
    CHECK(g1 == g3);
    CHECK(m1 == m3);
    CHECK(g1 == g_nested);
    CHECK(m1 == m_nested);
}
