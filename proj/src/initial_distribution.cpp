#include "msf/initial_distribution.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace msf {

namespace {

// Stationary distribution of A and its theta-derivatives, from the row-
// replaced linear system M pi = e_K, M = (I - A^T) with last row set to ones.
struct StationaryDist {
  Eigen::VectorXd pi;
  Eigen::MatrixXd dpi;                // K x d
  std::vector<Eigen::MatrixXd> d2pi;  // d of K x d (column b of [a] = d2 pi / da db)
};

StationaryDist stationary_with_derivs(const Vec& A, const Vec& dA, const Vec& d2A, int K,
                                      int d, int order) {
  Eigen::MatrixXd Am(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) Am(i, j) = A[i * K + j];
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(K, K) - Am.transpose();
  M.row(K - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K);
  rhs(K - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);

  StationaryDist out;
  out.pi = lu.solve(rhs);
  if (order < 1) return out;

  auto slice = [&](const Vec& src, std::size_t a) {
    Eigen::MatrixXd S(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) S(i, j) = src[(a * K + i) * K + j];
    return S;
  };

  out.dpi.resize(K, d);
  std::vector<Eigen::MatrixXd> dAs(d);
  for (int a = 0; a < d; ++a) {
    dAs[a] = slice(dA, a);
    Eigen::VectorXd r = dAs[a].transpose() * out.pi;  // = -dM_a * pi
    r(K - 1) = 0.0;
    out.dpi.col(a) = lu.solve(r);
  }
  if (order < 2) return out;

  out.d2pi.assign(d, Eigen::MatrixXd(K, d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Eigen::MatrixXd d2s = slice(d2A, static_cast<std::size_t>(a) * d + b);
      Eigen::VectorXd r = d2s.transpose() * out.pi + dAs[a].transpose() * out.dpi.col(b) +
                          dAs[b].transpose() * out.dpi.col(a);
      r(K - 1) = 0.0;
      out.d2pi[a].col(b) = lu.solve(r);
    }
  return out;
}

}  // namespace

InitialDistribution default_initial_distribution(const Model& model,
                                                 const ParameterVector& theta,
                                                 InitialMode mode, const Vec* user_nu,
                                                 int order) {
  const int K = model.num_regimes();
  const int p = model.markov_order();
  const int d = model.param_dim();
  const int M = model.num_tuples();

  InitialDistribution out;
  if (mode == InitialMode::uniform) {
    out.nu.assign(M, 1.0 / M);
    return out;
  }
  if (mode == InitialMode::user) {
    if (!user_nu) throw ConfigError("user initial distribution requires a vector");
    if (static_cast<int>(user_nu->size()) != M)
      throw ConfigError("user initial distribution must have K^p entries");
    double s = 0.0;
    for (double v : *user_nu) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ConfigError("user initial distribution entries must lie in [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw ConfigError("user initial distribution does not sum to 1");
    out.nu = *user_nu;
    return out;
  }

  // ergodic
  Vec A, dA, d2A;
  if (!model.transition_matrix(theta.theta, A, order >= 1 ? &dA : nullptr,
                               order >= 2 ? &d2A : nullptr))
    throw ConfigError("ergodic initial distribution requires time-homogeneous transitions");
  StationaryDist st = stationary_with_derivs(A, dA, d2A, K, d, order);

  out.nu.assign(M, 0.0);
  if (order >= 1) out.grad_nu.assign(static_cast<std::size_t>(M) * d, 0.0);
  if (order >= 2) out.hess_nu.assign(static_cast<std::size_t>(M) * d * d, 0.0);

  std::vector<int> digs(p);
  Vec G(d), H(static_cast<std::size_t>(d) * d), Gn(d), Hn(static_cast<std::size_t>(d) * d);
  for (int code = 0; code < M; ++code) {
    decode_tuple(code, K, p, digs.data());
    // tuple (S_0, ..., S_{-p+1}): start from pi at the oldest digit and chain
    // transitions forward in time.
    int oldest = digs[p - 1];
    double V = st.pi(oldest);
    std::fill(G.begin(), G.end(), 0.0);
    std::fill(H.begin(), H.end(), 0.0);
    if (order >= 1)
      for (int a = 0; a < d; ++a) G[a] = st.dpi(oldest, a);
    if (order >= 2)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) H[a * d + b] = st.d2pi[a](oldest, b);

    for (int i = p - 1; i >= 1; --i) {
      const int from = digs[i], to = digs[i - 1];
      const double v = A[from * K + to];
      // (V, G, H) <- product with factor (v, g, h)
      if (order >= 2) {
        for (int a = 0; a < d; ++a) {
          const double ga = dA[(static_cast<std::size_t>(a) * K + from) * K + to];
          for (int b = 0; b < d; ++b) {
            const double gb = dA[(static_cast<std::size_t>(b) * K + from) * K + to];
            const double hab =
                d2A[((static_cast<std::size_t>(a) * d + b) * K + from) * K + to];
            Hn[a * d + b] = H[a * d + b] * v + G[a] * gb + ga * G[b] + V * hab;
          }
        }
        H.swap(Hn);
      }
      if (order >= 1) {
        for (int a = 0; a < d; ++a) {
          const double ga = dA[(static_cast<std::size_t>(a) * K + from) * K + to];
          Gn[a] = G[a] * v + V * ga;
        }
        G.swap(Gn);
      }
      V *= v;
    }
    out.nu[code] = V;
    if (order >= 1)
      for (int a = 0; a < d; ++a) out.grad_nu[static_cast<std::size_t>(code) * d + a] = G[a];
    if (order >= 2)
      for (std::size_t ab = 0; ab < static_cast<std::size_t>(d) * d; ++ab)
        out.hess_nu[static_cast<std::size_t>(code) * d * d + ab] = H[ab];
  }
  return out;
}

}  // namespace msf
