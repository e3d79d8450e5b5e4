#include "semtts/oracles.hpp"

#include "semtts/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace semtts::oracle {

namespace {

double weighted_output(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks,
                       const Matrix& grad_out) {
    const auto out = fuse_sequential(q, kv, cfg, masks).matrix;
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += out.values()[i] * grad_out.values()[i];
    return acc;
}

} // namespace

FusionGrads finite_difference_grads(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks,
                                    const Matrix& grad_out, double eps) {
    FusionGrads g{Matrix(q.rows(), q.cols()), Matrix(kv.rows(), kv.cols())};
    Matrix qp = q;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double saved = qp.values()[i];
        qp.values()[i] = saved + eps;
        const double plus = weighted_output(qp, kv, cfg, masks, grad_out);
        qp.values()[i] = saved - eps;
        const double minus = weighted_output(qp, kv, cfg, masks, grad_out);
        qp.values()[i] = saved;
        g.grad_q.values()[i] = (plus - minus) / (2.0 * eps);
    }
    Matrix kvp = kv;
    for (std::size_t i = 0; i < kv.size(); ++i) {
        const double saved = kvp.values()[i];
        kvp.values()[i] = saved + eps;
        const double plus = weighted_output(q, kvp, cfg, masks, grad_out);
        kvp.values()[i] = saved - eps;
        const double minus = weighted_output(q, kvp, cfg, masks, grad_out);
        kvp.values()[i] = saved;
        g.grad_kv.values()[i] = (plus - minus) / (2.0 * eps);
    }
    return g;
}

double gradient_relative_error(const FusionGrads& analytic, const FusionGrads& numeric) {
    double diff = 0.0, scale = 0.0;
    auto scan = [&](const Matrix& a, const Matrix& n) {
        if (a.rows() != n.rows() || a.cols() != n.cols()) throw ShapeError("gradient shapes differ");
        for (std::size_t i = 0; i < a.size(); ++i) {
            diff = std::max(diff, std::abs(a.values()[i] - n.values()[i]));
            scale = std::max({scale, std::abs(a.values()[i]), std::abs(n.values()[i])});
        }
    };
    scan(analytic.grad_q, numeric.grad_q);
    scan(analytic.grad_kv, numeric.grad_kv);
    if (scale == 0.0) return diff;
    return diff / scale;
}

DenseEigen covariance_top_eigen(const Matrix& h) {
    const auto n = static_cast<Eigen::Index>(h.rows());
    const auto d = static_cast<Eigen::Index>(h.cols());
    if (n < 2) throw DegenerateInputError("covariance oracle needs two rows");
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) x(r, c) = h(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("eigen solver failed");
    // Eigenvalues ascend.
    DenseEigen out;
    out.top_value = solver.eigenvalues()(d - 1);
    out.second_value = d > 1 ? solver.eigenvalues()(d - 2) : -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd v = solver.eigenvectors().col(d - 1);
    out.top_vector.assign(v.data(), v.data() + d);
    return out;
}

std::vector<std::vector<int>> enumerate_lists(int alphabet, std::size_t max_len) {
    std::vector<std::vector<int>> out{{}};
    std::size_t begin = 0;
    for (std::size_t len = 1; len <= max_len; ++len) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
            for (int s = 0; s < alphabet; ++s) {
                auto next = out[i];
                next.push_back(s);
                out.push_back(std::move(next));
            }
        }
        begin = end;
    }
    return out;
}

std::vector<int> edit_distance_table(const std::vector<std::vector<int>>& lists, int alphabet) {
    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t i = 0; i < lists.size(); ++i) index.emplace(lists[i], i);
    std::size_t max_len = 0;
    for (const auto& l : lists) max_len = std::max(max_len, l.size());

    // Adjacency over single edits that stay inside the enumerated set; an
    // optimal edit script never needs an intermediate longer than both ends.
    std::vector<std::vector<std::size_t>> adj(lists.size());
    for (std::size_t i = 0; i < lists.size(); ++i) {
        const auto& l = lists[i];
        auto link = [&](const std::vector<int>& other) {
            auto it = index.find(other);
            if (it != index.end()) adj[i].push_back(it->second);
        };
        for (std::size_t p = 0; p < l.size(); ++p) {
            auto del = l;
            del.erase(del.begin() + static_cast<std::ptrdiff_t>(p));
            link(del);
            for (int s = 0; s < alphabet; ++s) {
                if (s == l[p]) continue;
                auto sub = l;
                sub[p] = s;
                link(sub);
            }
        }
        if (l.size() < max_len) {
            for (std::size_t p = 0; p <= l.size(); ++p) {
                for (int s = 0; s < alphabet; ++s) {
                    auto ins = l;
                    ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(p), s);
                    link(ins);
                }
            }
        }
    }

    const std::size_t n = lists.size();
    std::vector<int> table(n * n, -1);
    std::deque<std::size_t> queue;
    for (std::size_t src = 0; src < n; ++src) {
        int* dist = table.data() + src * n;
        dist[src] = 0;
        queue.assign(1, src);
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return table;
}

} // namespace semtts::oracle
