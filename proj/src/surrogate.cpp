#include "mfilu/surrogate.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace mfilu {

namespace {

using Poly1 = std::vector<double>;

// Monomial coefficients (in t) of the Chebyshev series sum c_i T_i(t).
Poly1 chebyshev_to_monomial(const Poly1& c) {
    const std::size_t m = c.size();
    Poly1 out(m, 0.0);
    Poly1 prev(m, 0.0), cur(m, 0.0), next(m, 0.0);
    prev[0] = 1.0;  // T_0
    if (m > 1) cur[1] = 1.0;  // T_1
    for (std::size_t i = 0; i < m; ++i) {
        const Poly1& t = i == 0 ? prev : cur;
        for (std::size_t j = 0; j < m; ++j) out[j] += c[i] * t[j];
        if (i >= 1 && i + 1 < m) {
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t j = 0; j + 1 < m; ++j) next[j + 1] += 2.0 * cur[j];
            for (std::size_t j = 0; j < m; ++j) next[j] -= prev[j];
            prev.swap(cur);
            cur.swap(next);
        }
    }
    return out;
}

// Chebyshev coefficients of the monomial series sum m_k t^k.
Poly1 monomial_to_chebyshev(const Poly1& m) {
    const std::size_t size = m.size();
    Poly1 out(size, 0.0);
    Poly1 power(size, 0.0);  // t^k in the Chebyshev basis
    power[0] = 1.0;
    for (std::size_t k = 0; k < size; ++k) {
        for (std::size_t j = 0; j < size; ++j) out[j] += m[k] * power[j];
        Poly1 next(size, 0.0);
        for (std::size_t j = 0; j < size; ++j) {
            if (power[j] == 0.0) continue;
            if (j == 0) {
                if (1 < size) next[1] += power[0];
            } else {
                if (j + 1 < size) next[j + 1] += 0.5 * power[j];
                next[j - 1] += 0.5 * power[j];
            }
        }
        power.swap(next);
    }
    return out;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Matrix taking monomial coefficients in s = (t + 1) / 2 to Chebyshev coefficients in t.
Eigen::MatrixXd s_monomial_to_chebyshev(int deg) {
    const int m = deg + 1;
    Eigen::MatrixXd out(m, m);
    for (int i = 0; i < m; ++i) {
        Poly1 mono_t(static_cast<std::size_t>(m), 0.0);
        for (int j = 0; j <= i; ++j) mono_t[static_cast<std::size_t>(j)] = binomial(i, j) / std::ldexp(1.0, i);
        const Poly1 cheb = monomial_to_chebyshev(mono_t);
        for (int j = 0; j < m; ++j) out(j, i) = cheb[static_cast<std::size_t>(j)];
    }
    return out;
}

}  // namespace

std::vector<double> chebyshev_values(int deg, double t) {
    std::vector<double> v(static_cast<std::size_t>(deg + 1));
    v[0] = 1.0;
    if (deg >= 1) v[1] = t;
    for (int i = 2; i <= deg; ++i)
        v[static_cast<std::size_t>(i)] = 2.0 * t * v[static_cast<std::size_t>(i - 1)] - v[static_cast<std::size_t>(i - 2)];
    return v;
}

Polynomial3::Polynomial3(int level, Degrees degrees, std::vector<double> coefficients)
    : level_(level), degrees_(degrees), coeffs_(std::move(coefficients)) {
    for (int d : degrees_)
        if (d < 0) throw Error("polynomial degrees must be non-negative");
    if (coeffs_.size() != basis_size(degrees_)) throw Error("polynomial coefficient count does not match degrees");
}

Polynomial3 Polynomial3::zero(int level, Degrees degrees) {
    return Polynomial3(level, degrees, std::vector<double>(basis_size(degrees), 0.0));
}

Polynomial3 Polynomial3::from_monomials(int level, Degrees degrees, const std::vector<double>& monomials) {
    Polynomial3 p = zero(level, degrees);
    if (monomials.size() != p.coeffs_.size()) throw Error("monomial coefficient count does not match degrees");
    // s = h x = (t + 1) / 2 on every axis; transform one axis at a time.
    std::vector<double> c = monomials;
    const int nx = degrees[0] + 1, ny = degrees[1] + 1, nz = degrees[2] + 1;
    auto id = [&](int i, int j, int k) { return static_cast<std::size_t>(i + nx * (j + ny * k)); };
    const Eigen::MatrixXd tx = s_monomial_to_chebyshev(degrees[0]);
    const Eigen::MatrixXd ty = s_monomial_to_chebyshev(degrees[1]);
    const Eigen::MatrixXd tz = s_monomial_to_chebyshev(degrees[2]);
    std::vector<double> tmp(c.size());
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double s = 0;
                for (int a = 0; a < nx; ++a) s += tx(i, a) * c[id(a, j, k)];
                tmp[id(i, j, k)] = s;
            }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double s = 0;
                for (int a = 0; a < ny; ++a) s += ty(j, a) * tmp[id(i, a, k)];
                c[id(i, j, k)] = s;
            }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double s = 0;
                for (int a = 0; a < nz; ++a) s += tz(k, a) * c[id(i, j, a)];
                tmp[id(i, j, k)] = s;
            }
    p.coeffs_ = std::move(tmp);
    return p;
}

double Polynomial3::operator()(double x, double y, double z) const {
    const auto tx = chebyshev_values(degrees_[0], axis_coordinate(x, level_));
    const auto ty = chebyshev_values(degrees_[1], axis_coordinate(y, level_));
    const auto tz = chebyshev_values(degrees_[2], axis_coordinate(z, level_));
    double sum = 0;
    std::size_t q = 0;
    for (int k = 0; k <= degrees_[2]; ++k)
        for (int j = 0; j <= degrees_[1]; ++j) {
            const double yz = ty[static_cast<std::size_t>(j)] * tz[static_cast<std::size_t>(k)];
            for (int i = 0; i <= degrees_[0]; ++i) sum += coeffs_[q++] * tx[static_cast<std::size_t>(i)] * yz;
        }
    return sum;
}

std::vector<double> Polynomial3::row_coefficients(int y, int z) const {
    const auto ty = chebyshev_values(degrees_[1], axis_coordinate(y, level_));
    const auto tz = chebyshev_values(degrees_[2], axis_coordinate(z, level_));
    std::vector<double> c(static_cast<std::size_t>(degrees_[0] + 1), 0.0);
    std::size_t q = 0;
    for (int k = 0; k <= degrees_[2]; ++k)
        for (int j = 0; j <= degrees_[1]; ++j) {
            const double yz = ty[static_cast<std::size_t>(j)] * tz[static_cast<std::size_t>(k)];
            for (int i = 0; i <= degrees_[0]; ++i) c[static_cast<std::size_t>(i)] += coeffs_[q++] * yz;
        }
    return c;
}

NddfRow::NddfRow(const Polynomial3& poly, LogicalCoord start, int step) {
    const int level = poly.level();
    const auto cheb = poly.row_coefficients(start.y, start.z);
    const std::size_t m = cheb.size();
    table_.assign(m, 0.0);
    const auto tv = chebyshev_values(static_cast<int>(m) - 1, Polynomial3::axis_coordinate(start.x, level));
    for (std::size_t i = 0; i < m; ++i) table_[0] += cheb[i] * tv[i];
    if (m == 1) return;

    // Taylor coefficients b_i around t0, then Delta^j = sum_i b_i delta^i j! S(i, j).
    const Poly1 mono = chebyshev_to_monomial(cheb);
    const double t0 = Polynomial3::axis_coordinate(start.x, level);
    Poly1 b(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0, pw = 1;
        for (std::size_t i = j; i < m; ++i) {
            s += mono[i] * binomial(static_cast<int>(i), static_cast<int>(j)) * pw;
            pw *= t0;
        }
        b[j] = s;
    }
    const double delta = 2.0 * std::ldexp(static_cast<double>(step), -level);
    // surj[i][j] = j! S(i, j), the number of surjections of an i-set onto a j-set.
    std::vector<std::vector<double>> surj(m, std::vector<double>(m, 0.0));
    surj[0][0] = 1.0;
    for (std::size_t i = 1; i < m; ++i)
        for (std::size_t j = 1; j <= i; ++j) surj[i][j] = static_cast<double>(j) * (surj[i - 1][j] + surj[i - 1][j - 1]);
    for (std::size_t j = 1; j < m; ++j) {
        double s = 0, pw = std::pow(delta, static_cast<double>(j));
        for (std::size_t i = j; i < m; ++i) {
            s += b[i] * pw * surj[i][j];
            pw *= delta;
        }
        table_[j] = s;
    }
}

std::vector<double> nddf_row_evaluate(const Polynomial3& poly, LogicalCoord start, int count, int step) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    NddfRow row(poly, start, step);
    for (int k = 0; k < count; ++k) {
        out.push_back(row.value());
        row.advance();
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view target_name(std::size_t target) {
    if (target < kNumLower) return name(kLowerDirections[target]);
    if (target == kInvDiagonal) return "inv_c";
    throw Error("unknown surrogate target");
}

int sample_stride(int level, int coarse_level) {
    if (coarse_level > level) throw Error("sampling level must not exceed the fine level");
    return std::max(1, 1 << std::max(0, level - coarse_level));
}

bool in_sample_set(Direction d, LogicalCoord p, int level, int stride) {
    if (!is_interior(p, level)) return false;
    const LogicalCoord q = p + offset(d);
    if (!is_interior(q, level)) return false;
    return (q.x - 1) % stride == 0 && (q.y - 1) % stride == 0 && (q.z - 1) % stride == 0;
}

SampleSet sample_set(Direction d, int level, int coarse_level) {
    if (!is_lower(d) && d != Direction::c) throw Error("sample sets exist for lower directions and c only");
    SampleSet set;
    set.direction = d;
    set.level = level;
    set.coarse_level = coarse_level;
    set.stride = sample_stride(level, coarse_level);
    for_each_interior(level, [&](LogicalCoord p) {
        if (in_sample_set(d, p, level, set.stride)) set.points.push_back(p);
    });
    return set;
}

struct LsqProblem::Impl {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr;
    Eigen::BDCSVD<Eigen::MatrixXd> svd;  // of the triangular factor R
    Eigen::Index cols = 0;
    Eigen::Index rank = 0;
    bool min_norm = false;
};

namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::MatrixXd design_matrix(std::span<const LogicalCoord> points, Degrees deg, int level) {
    const auto cols = static_cast<Eigen::Index>(Polynomial3::basis_size(deg));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), cols);
    for (std::size_t r = 0; r < points.size(); ++r) {
        const auto tx = chebyshev_values(deg[0], Polynomial3::axis_coordinate(points[r].x, level));
        const auto ty = chebyshev_values(deg[1], Polynomial3::axis_coordinate(points[r].y, level));
        const auto tz = chebyshev_values(deg[2], Polynomial3::axis_coordinate(points[r].z, level));
        Eigen::Index q = 0;
        for (int k = 0; k <= deg[2]; ++k)
            for (int j = 0; j <= deg[1]; ++j)
                for (int i = 0; i <= deg[0]; ++i)
                    m(static_cast<Eigen::Index>(r), q++) = tx[static_cast<std::size_t>(i)] *
                                                          ty[static_cast<std::size_t>(j)] *
                                                          tz[static_cast<std::size_t>(k)];
    }
    return m;
}

}  // namespace

LsqProblem::LsqProblem(std::span<const LogicalCoord> points, Degrees degrees, int level, bool allow_rank_deficient)
    : impl_(std::make_unique<Impl>()), num_points_(points.size()), degrees_(degrees), level_(level) {
    for (int d : degrees)
        if (d < 0) throw Error("polynomial degrees must be non-negative");
    if (points.empty()) throw Error("least-squares fit needs at least one sample");
    Eigen::MatrixXd m = design_matrix(points, degrees, level);
    const Eigen::Index rows = m.rows();
    impl_->cols = m.cols();
    // Pad short designs with zero rows so that R is square.
    if (rows < impl_->cols) m.conservativeResizeLike(Eigen::MatrixXd::Zero(impl_->cols, impl_->cols));
    impl_->qr.compute(m);
    const Eigen::MatrixXd r = impl_->qr.matrixQR().topRows(impl_->cols).triangularView<Eigen::Upper>();
    impl_->svd.compute(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = impl_->svd.singularValues();
    const double cut = kRankThreshold * (sv.size() ? sv[0] : 0.0);
    impl_->rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > cut) ++impl_->rank;
    impl_->min_norm = allow_rank_deficient && impl_->rank < impl_->cols;
}

LsqProblem::~LsqProblem() = default;
LsqProblem::LsqProblem(LsqProblem&&) noexcept = default;
LsqProblem& LsqProblem::operator=(LsqProblem&&) noexcept = default;

bool LsqProblem::full_rank() const { return impl_->rank == impl_->cols; }
int LsqProblem::rank() const { return static_cast<int>(impl_->rank); }

Polynomial3 LsqProblem::solve(std::span<const double> values, std::string_view label) const {
    if (values.size() != num_points_) throw Error("least-squares value count does not match the sample points");
    const Eigen::Index rows = impl_->qr.rows();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    for (std::size_t i = 0; i < values.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = values[i];
    rhs.applyOnTheLeft(impl_->qr.householderQ().adjoint());
    const Eigen::VectorXd top = rhs.head(impl_->cols);
    Eigen::VectorXd c;
    if (impl_->min_norm) {
        const auto& sv = impl_->svd.singularValues();
        Eigen::VectorXd w = impl_->svd.matrixU().transpose() * top;
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = i < impl_->rank ? w[i] / sv[i] : 0.0;
        c = impl_->svd.matrixV() * w;
    } else {
        if (!full_rank()) {
            throw Error("rank-deficient least-squares design" +
                        (label.empty() ? std::string() : " for direction " + std::string(label)) + " (rank " +
                        std::to_string(rank()) + " of " + std::to_string(impl_->cols) + ")");
        }
        c = impl_->qr.matrixQR().topRows(impl_->cols).triangularView<Eigen::Upper>().solve(top);
    }
    return Polynomial3(level_, degrees_, std::vector<double>(c.data(), c.data() + c.size()));
}

Polynomial3 lsq_fit(std::span<const LogicalCoord> points, std::span<const double> values, Degrees degrees, int level,
                    std::string_view label) {
    if (points.empty())
        throw Error("empty sample set" + (label.empty() ? std::string() : " for direction " + std::string(label)));
    return LsqProblem(points, degrees, level).solve(values, label);
}

Polynomial3 lsq_fit_min_norm(std::span<const LogicalCoord> points, std::span<const double> values, Degrees degrees,
                             int level) {
    return LsqProblem(points, degrees, level, true).solve(values);
}

double lsq_residual(const Polynomial3& poly, std::span<const LogicalCoord> points, std::span<const double> values) {
    double s = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double r = poly(points[i]) - values[i];
        s += r * r;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------

std::string_view name(Variant v) { return v == Variant::v1 ? "V1" : "V2"; }

Variant variant_from_name(std::string_view s) {
    if (s == "V1" || s == "v1" || s == "1") return Variant::v1;
    if (s == "V2" || s == "v2" || s == "2") return Variant::v2;
    throw Error("unknown surrogate variant '" + std::string(s) + "'");
}

BandStore::BandStore(int level) : level_(level), n_(cells_per_edge(level)) {
    const int n = n_;
    if (n - 3 < 1) {
        row_start_.assign(1, 0);
    } else {
        row_start_.assign(triangular_count(n - 3), 0);
    }
    int offset_count = 0;
    for (int z = 1; z <= n - 3; ++z)
        for (int y = 1; y <= n - 2 - z; ++y) {
            const int len = n - 1 - y - z;
            row_start_[triangle_index(y - 1, z - 1, n - 3)] = offset_count;
            offset_count += full_row(y, z) ? len : std::min(len, 2);
        }
    data_.assign(static_cast<std::size_t>(offset_count), LowerStencil::identity());
}

bool BandStore::contains(LogicalCoord p) const {
    if (!is_interior(p, level_)) return false;
    return full_row(p.y, p.z) || p.x == 1 || p.x == n_ - 1 - p.y - p.z;
}

std::size_t BandStore::slot(LogicalCoord p) const {
    if (!contains(p)) throw Error("point is not in the boundary band store");
    const int start = row_start_[triangle_index(p.y - 1, p.z - 1, n_ - 3)];
    if (full_row(p.y, p.z) || p.x == 1) return static_cast<std::size_t>(start + p.x - 1);
    return static_cast<std::size_t>(start + 1);
}

LowerStencil SurrogateILU::evaluate(LogicalCoord p) const {
    if (variant == Variant::v1 && band.contains(p)) return band.at(p);
    LowerStencil s;
    for (std::size_t k = 0; k < kNumLower; ++k) s.l[k] = polys[k](p);
    s.inv_d = polys[kInvDiagonal](p);
    s.d = 1.0 / s.inv_d;
    return s;
}

namespace {

Direction target_direction(std::size_t k) { return k < kNumLower ? kLowerDirections[k] : Direction::c; }

}  // namespace

int choose_coarse_level(int level, Degrees degrees) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int, int>, int> cache;
    const auto key = std::make_tuple(level, degrees[0], degrees[1], degrees[2]);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    int chosen = level + 1;
    for (int lh = std::max(2, level - 2); lh <= level && chosen > level; ++lh) {
        bool ok = true;
        for (std::size_t k = 0; k < kNumTargets && ok; ++k) {
            const auto set = sample_set(target_direction(k), level, lh);
            if (set.points.empty()) continue;
            ok = LsqProblem(set.points, degrees, level).full_rank();
        }
        if (ok) chosen = lh;
    }
    std::lock_guard lock(mutex);
    cache[key] = chosen;
    return chosen;
}

SurrogateILU build_surrogate_ilu(const StencilSource& a, const SurrogateOptions& options) {
    const int level = a.level();
    for (int d : options.degrees)
        if (d < 0) throw Error("polynomial degrees must be non-negative");
    SurrogateILU sur;
    sur.level = level;
    sur.degrees = options.degrees;
    sur.variant = options.variant;
    int lh = options.coarse_level;
    if (lh < 0) {
        lh = choose_coarse_level(level, options.degrees);
        if (lh > level) {
            lh = level;
            sur.min_norm = true;
        }
    } else if (lh < 2 || lh > level) {
        throw Error("sampling level must lie in [2, level]");
    }
    sur.coarse_level = lh;
    const int stride = sample_stride(level, lh);

    std::array<SampleSet, kNumTargets> sets;
    std::array<std::vector<double>, kNumTargets> values;
    for (std::size_t k = 0; k < kNumTargets; ++k) {
        sets[k] = sample_set(target_direction(k), level, lh);
        values[k].reserve(sets[k].points.size());
    }
    if (sur.variant == Variant::v1) sur.band = BandStore(level);

    sur.stats = factorize_streaming(a, [&](LogicalCoord p, const LowerStencil& f) {
        for (std::size_t k = 0; k < kNumTargets; ++k) {
            if (!in_sample_set(target_direction(k), p, level, stride)) continue;
            values[k].push_back(k < kNumLower ? f.l[k] : f.inv_d);
        }
        if (sur.variant == Variant::v1 && sur.band.contains(p)) sur.band.set(p, f);
    });

    for (std::size_t k = 0; k < kNumTargets; ++k) {
        if (sets[k].points.empty()) {
            sur.polys[k] = Polynomial3::zero(level, options.degrees);
            continue;
        }
        LsqProblem problem(sets[k].points, options.degrees, level, sur.min_norm);
        sur.polys[k] = problem.solve(values[k], target_name(k));
    }
    return sur;
}

void surrogate_smooth(Eigen::Ref<Vector> u, const Vector& f, const SurrogateILU& sur, const StencilSource& a,
                      std::span<const int> map) {
    const int level = a.level();
    if (sur.level != level) throw Error("surrogate_smooth: surrogate built for a different level");
    const bool v1 = sur.variant == Variant::v1;
    if (v1 && sur.band.size() == 0 && interior_size(level) > 0) throw Error("surrogate_smooth: V1 without band store");
    const int n = cells_per_edge(level);
    std::vector<double> w(grid_size(level), 0.0);
    std::vector<double> acc(w.size(), 0.0);

    auto forward = [&](LogicalCoord p, const double* l) {
        const std::size_t i = grid_index(p, level);
        const Stencil15 s = a.at(p);
        double r = f[map[i]];
        for (Direction d : kAllDirections) r -= at(s, d) * u[map[grid_index(p + offset(d), level)]];
        for (std::size_t k = 0; k < kNumLower; ++k) r -= l[k] * w[grid_index(p + offset(kLowerDirections[k]), level)];
        w[i] = r;
    };
    auto backward = [&](LogicalCoord p, const double* l, double inv_d) {
        const std::size_t i = grid_index(p, level);
        const double x = w[i] * inv_d + acc[i];
        for (std::size_t k = 0; k < kNumLower; ++k)
            acc[grid_index(p + offset(kLowerDirections[k]), level)] -= l[k] * x;
        u[map[i]] += x;
    };

    std::array<NddfRow, kNumTargets> rows;
    std::array<double, kNumLower> l{};

    // Sweep 1: ascending rows, residual fused with forward substitution.
    for (int z = 1; z <= n - 3; ++z) {
        for (int y = 1; y <= n - 2 - z; ++y) {
            const int xmax = n - 1 - y - z;
            if (v1 && sur.band.full_row(y, z)) {
                for (int x = 1; x <= xmax; ++x) forward({x, y, z}, sur.band.at({x, y, z}).l.data());
                continue;
            }
            int xs = 1, xe = xmax;
            if (v1) {
                forward({1, y, z}, sur.band.at({1, y, z}).l.data());
                xs = 2;
                xe = xmax - 1;
            }
            if (xs <= xe) {
                for (std::size_t k = 0; k < kNumLower; ++k) rows[k] = NddfRow(sur.polys[k], {xs, y, z}, 1);
                for (int x = xs; x <= xe; ++x) {
                    for (std::size_t k = 0; k < kNumLower; ++k) {
                        l[k] = rows[k].value();
                        rows[k].advance();
                    }
                    forward({x, y, z}, l.data());
                }
            }
            if (v1 && xmax > 1) forward({xmax, y, z}, sur.band.at({xmax, y, z}).l.data());
        }
    }

    // Sweep 2: descending rows, diagonal scaling, backward substitution, update.
    for (int z = n - 3; z >= 1; --z) {
        for (int y = n - 2 - z; y >= 1; --y) {
            const int xmax = n - 1 - y - z;
            if (v1 && sur.band.full_row(y, z)) {
                for (int x = xmax; x >= 1; --x) {
                    const auto& s = sur.band.at({x, y, z});
                    backward({x, y, z}, s.l.data(), s.inv_d);
                }
                continue;
            }
            int xs = 1, xe = xmax;
            if (v1) {
                if (xmax > 1) {
                    const auto& s = sur.band.at({xmax, y, z});
                    backward({xmax, y, z}, s.l.data(), s.inv_d);
                }
                xs = 2;
                xe = xmax - 1;
            }
            if (xs <= xe) {
                for (std::size_t k = 0; k < kNumTargets; ++k) rows[k] = NddfRow(sur.polys[k], {xe, y, z}, -1);
                for (int x = xe; x >= xs; --x) {
                    for (std::size_t k = 0; k < kNumLower; ++k) {
                        l[k] = rows[k].value();
                        rows[k].advance();
                    }
                    const double inv_d = rows[kInvDiagonal].value();
                    rows[kInvDiagonal].advance();
                    backward({x, y, z}, l.data(), inv_d);
                }
            }
            if (v1) {
                const auto& s = sur.band.at({1, y, z});
                backward({1, y, z}, s.l.data(), s.inv_d);
            }
        }
    }
}

SurrogateStencils::SurrogateStencils(const StencilSource& reference, Degrees degrees, int coarse_level)
    : level_(reference.level()) {
    int lh = coarse_level;
    bool min_norm = false;
    SampleSet set;
    if (lh < 0) {
        lh = std::max(2, level_ - 2);
        for (;; ++lh) {
            set = sample_set(Direction::c, level_, lh);
            if (LsqProblem(set.points, degrees, level_).full_rank()) break;
            if (lh == level_) {
                min_norm = true;
                break;
            }
        }
    } else {
        set = sample_set(Direction::c, level_, lh);
    }
    const LsqProblem problem(set.points, degrees, level_, min_norm);
    std::vector<double> values(set.points.size());
    std::vector<Stencil15> samples;
    samples.reserve(set.points.size());
    for (const auto& p : set.points) samples.push_back(reference.at(p));
    for (Direction d : kAllDirections) {
        for (std::size_t i = 0; i < samples.size(); ++i) values[i] = mfilu::at(samples[i], d);
        polys_[index(d)] = problem.solve(values, name(d));
    }
}

Stencil15 SurrogateStencils::at(LogicalCoord p) const {
    Stencil15 s;
    for (std::size_t k = 0; k < kNumDirections; ++k) s[k] = polys_[k](p);
    return s;
}

}  // namespace mfilu
