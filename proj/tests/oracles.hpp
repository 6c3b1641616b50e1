#pragma once

// Dense reference implementations used to cross-check the stencil kernels.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "mfilu/assembly.hpp"

namespace oracle {

using mfilu::LogicalCoord;

inline std::vector<LogicalCoord> interior_points(int level) {
    std::vector<LogicalCoord> pts;
    const int n = mfilu::cells_per_edge(level);
    for (int z = 0; z <= n; ++z)
        for (int y = 0; y <= n; ++y)
            for (int x = 0; x <= n; ++x)
                if (mfilu::is_interior({x, y, z}, level)) pts.push_back({x, y, z});
    return pts;
}

inline int find_point(const std::vector<LogicalCoord>& pts, LogicalCoord p) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i] == p) return static_cast<int>(i);
    return -1;
}

struct DenseOperator {
    std::vector<LogicalCoord> points;
    Eigen::MatrixXd a;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pattern;
};

/// Interior block of the operator, with couplings to boundary points dropped.
inline DenseOperator dense_interior(const mfilu::StencilSource& s) {
    DenseOperator op;
    op.points = interior_points(s.level());
    const auto n = static_cast<Eigen::Index>(op.points.size());
    op.a = Eigen::MatrixXd::Zero(n, n);
    op.pattern.setConstant(n, n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto st = s.at(op.points[static_cast<std::size_t>(i)]);
        for (mfilu::Direction d : mfilu::kAllDirections) {
            const int j = find_point(op.points, op.points[static_cast<std::size_t>(i)] + mfilu::offset(d));
            if (j < 0) continue;
            op.a(i, j) = mfilu::at(st, d);
            op.pattern(i, j) = true;
        }
    }
    return op;
}

/// Textbook ILU(0) (IKJ variant) restricted to the structural pattern.
/// Returns the combined factor: unit lower part below, U on and above the diagonal.
inline Eigen::MatrixXd ilu0(const Eigen::MatrixXd& a, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& pattern) {
    Eigen::MatrixXd m = a;
    const Eigen::Index n = m.rows();
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index k = 0; k < i; ++k) {
            if (!pattern(i, k)) continue;
            m(i, k) /= m(k, k);
            for (Eigen::Index j = k + 1; j < n; ++j)
                if (pattern(i, j)) m(i, j) -= m(i, k) * m(k, j);
        }
    }
    return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

inline double relative_difference(double a, double b, double floor = 1.0) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
