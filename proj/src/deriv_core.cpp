// Copyright 2025 The rbdopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rbd/detail/deriv_core.hpp"

#include <stdexcept>

#include "rbd/kinematics.hpp"

namespace rbd {
namespace detail {

namespace {

// Selected Cartesian rows of a contact quantity (x,z for planar points).
void scatterRows(const ContactPoint& c, const Vec3& x, int row, VecX& out) {
  if (c.dim == 2) {
    out(row) = x.x();
    out(row + 1) = x.z();
  } else {
    out.segment<3>(row) = x;
  }
}

void scatterRows(const ContactPoint& c, const Vec3& x, int row, int col, MatX& out) {
  if (c.dim == 2) {
    out(row, col) = x.x();
    out(row + 1, col) = x.z();
  } else {
    out.block<3, 1>(row, col) = x;
  }
}

void scatterRows(const ContactPoint& c, const Vec3& x, int row, int col, int page, Tensor3& out) {
  if (c.dim == 2) {
    out(row, col, page) = x.x();
    out(row + 1, col, page) = x.z();
  } else {
    for (int k = 0; k < 3; ++k) out(row + k, col, page) = x(k);
  }
}

Vec3 liftContactForce(const ContactPoint& contact, const VecX& lambda, int offset) {
  Vec3 f = Vec3::Zero();
  if (contact.dim == 2) {
    f.x() = lambda(offset);
    f.z() = lambda(offset + 1);
  } else {
    f = lambda.segment<3>(offset);
  }
  return f;
}

inline Vec3 ang(const Vec6& v) { return v.head<3>(); }
inline Vec3 lin(const Vec6& v) { return v.tail<3>(); }

}  // namespace

void DerivCore::compute(const KinematicTree& tree, const ContactSet& contacts, const VecX& q,
                        const VecX& qd, const VecX& qdd, const VecX& lambda,
                        const DerivCoreOptions& options) {
  n = tree.nv();
  nb = tree.numBodies();
  nc = totalConstraintDim(contacts);
  const bool so = options.secondOrder;
  if (q.size() != n || qd.size() != n || qdd.size() != n) {
    throw std::invalid_argument("DerivCore: state dimension mismatch");
  }
  if (lambda.size() != nc) {
    throw std::invalid_argument("DerivCore: multiplier dimension mismatch");
  }

  const KinematicsResult kin = forwardKinematics(tree, q, qd);

  // Dof partial order and chain membership tables.
  auto pre = [&](int a, int b) { return tree.dofPrecedesOrEqual(a, b); };
  std::vector<char> onChain(nb * n);
  for (int i = 0; i < nb; ++i)
    for (int e = 0; e < n; ++e) onChain[i * n + e] = tree.isBodyAncestorOrSelf(tree.dofBody(e), i);
  auto chain = [&](int i, int e) -> bool { return onChain[i * n + e]; };

  // ---- Subspace columns and their configuration derivatives. ----
  std::vector<Vec6> s(n);
  for (int d = 0; d < n; ++d) s[d] = kin.groundSubspace.col(d);

  std::vector<Vec6> ds(n * n, Vec6::Zero());
  auto dsAt = [&](int d, int e) -> Vec6& { return ds[d * n + e]; };
  for (int d = 0; d < n; ++d)
    for (int e = 0; e < n; ++e)
      if (pre(e, d)) dsAt(d, e) = crossMotion(s[e], s[d]);

  std::vector<Vec6> d2s(n * n * n, Vec6::Zero());
  auto d2sAt = [&](int d, int e, int f) -> Vec6& { return d2s[(d * n + e) * n + f]; };
  for (int d = 0; d < n; ++d)
    for (int e = 0; e < n; ++e) {
      if (!pre(e, d)) continue;
      for (int f = 0; f < n; ++f) {
        if (!pre(f, d)) continue;
        d2sAt(d, e, f) = crossMotion(dsAt(e, f), s[d]) + crossMotion(s[e], dsAt(d, f));
      }
    }

  std::vector<Vec6> d3s;
  auto d3sAt = [&](int d, int e, int f, int g) -> Vec6& {
    return d3s[((d * n + e) * n + f) * n + g];
  };
  if (so) {
    d3s.assign(static_cast<size_t>(n) * n * n * n, Vec6::Zero());
    for (int d = 0; d < n; ++d)
      for (int e = 0; e < n; ++e) {
        if (!pre(e, d)) continue;
        for (int f = 0; f < n; ++f) {
          if (!pre(f, d)) continue;
          for (int g = 0; g < n; ++g) {
            if (!pre(g, d)) continue;
            d3sAt(d, e, f, g) = crossMotion(d2sAt(e, f, g), s[d]) +
                                crossMotion(dsAt(e, f), dsAt(d, g)) +
                                crossMotion(dsAt(e, g), dsAt(d, f)) +
                                crossMotion(s[e], d2sAt(d, f, g));
          }
        }
      }
  }

  // ---- Ground-frame inertias and derivatives. ----
  std::vector<Mat6> I(nb);
  for (int i = 0; i < nb; ++i) I[i] = transformInertia(kin.bodyToGround[i], tree.bodies[i].inertia);

  std::vector<Mat6> dI(nb * n, Mat6::Zero());
  auto dIAt = [&](int i, int e) -> Mat6& { return dI[i * n + e]; };
  for (int i = 0; i < nb; ++i)
    for (int e = 0; e < n; ++e)
      if (chain(i, e)) {
        dIAt(i, e) = crossForceOperator(s[e]) * I[i] - I[i] * crossMotionOperator(s[e]);
      }

  std::vector<Mat6> d2I;
  auto d2IAt = [&](int i, int e, int f) -> Mat6& { return d2I[(i * n + e) * n + f]; };
  if (so) {
    d2I.assign(static_cast<size_t>(nb) * n * n, Mat6::Zero());
    for (int i = 0; i < nb; ++i)
      for (int e = 0; e < n; ++e) {
        if (!chain(i, e)) continue;
        for (int f = 0; f < n; ++f) {
          if (!chain(i, f)) continue;
          d2IAt(i, e, f) = crossForceOperator(dsAt(e, f)) * I[i] +
                           crossForceOperator(s[e]) * dIAt(i, f) -
                           dIAt(i, f) * crossMotionOperator(s[e]) -
                           I[i] * crossMotionOperator(dsAt(e, f));
        }
      }
  }

  // ---- Body velocities/accelerations and their partials. ----
  Vec6 a0 = Vec6::Zero();
  if (options.withGravity) a0.tail<3>() = -tree.gravity;

  std::vector<Vec6> v(nb), a(nb);
  std::vector<Vec6> dv(nb * n, Vec6::Zero()), da(nb * n, Vec6::Zero()),
      dad(nb * n, Vec6::Zero());
  auto dvAt = [&](int i, int e) -> Vec6& { return dv[i * n + e]; };
  auto daAt = [&](int i, int e) -> Vec6& { return da[i * n + e]; };
  auto dadAt = [&](int i, int e) -> Vec6& { return dad[i * n + e]; };

  std::vector<Vec6> d2vQq, d2aQq, d2aQdQ, d2aQdQd;
  auto at2 = [&](std::vector<Vec6>& t, int i, int e, int f) -> Vec6& {
    return t[(i * n + e) * n + f];
  };
  if (so) {
    d2vQq.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
    d2aQq.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
    d2aQdQ.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
    d2aQdQd.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
  }

  std::vector<std::vector<int>> chainDofs(nb);
  for (int i = 0; i < nb; ++i)
    for (int e = 0; e < n; ++e)
      if (chain(i, e)) chainDofs[i].push_back(e);

  for (int i = 0; i < nb; ++i) {
    v[i] = kin.velocity[i];
    Vec6 ai = a0 + kin.biasAcceleration[i];
    for (int c : chainDofs[i]) ai += s[c] * qdd(c);
    a[i] = ai;

    for (int e : chainDofs[i]) {
      Vec6 dvi = Vec6::Zero();
      Vec6 dai = Vec6::Zero();
      for (int c : chainDofs[i]) {
        dvi += dsAt(c, e) * qd(c);
        dai += dsAt(c, e) * qdd(c);
        for (int f : chainDofs[i]) dai += d2sAt(c, f, e) * (qd(f) * qd(c));
      }
      dvAt(i, e) = dvi;
      daAt(i, e) = dai;
      Vec6 sdot = Vec6::Zero();
      for (int f : chainDofs[i]) sdot += dsAt(e, f) * qd(f);
      dadAt(i, e) = sdot + dvi;
    }

    if (so) {
      for (int e : chainDofs[i])
        for (int f : chainDofs[i]) {
          Vec6 vqq = Vec6::Zero(), aqq = Vec6::Zero(), aqdq = Vec6::Zero();
          for (int c : chainDofs[i]) {
            vqq += d2sAt(c, e, f) * qd(c);
            aqq += d2sAt(c, e, f) * qdd(c);
            aqdq += d2sAt(c, e, f) * qd(c);
            for (int g : chainDofs[i]) aqq += d3sAt(c, g, e, f) * (qd(g) * qd(c));
          }
          for (int g : chainDofs[i]) aqdq += d2sAt(e, g, f) * qd(g);
          at2(d2vQq, i, e, f) = vqq;
          at2(d2aQq, i, e, f) = aqq;
          at2(d2aQdQ, i, e, f) = aqdq;
          at2(d2aQdQd, i, e, f) = dsAt(e, f) + dsAt(f, e);
        }
    }
  }

  // ---- Contact geometry: points, their derivatives, external forces. ----
  struct ContactGeom {
    int body = 0;
    int row = 0;
    Vec3 bar = Vec3::Zero();  // lifted contact force
    Vec3 p = Vec3::Zero();
    std::vector<Vec3> dp;    // n
    std::vector<Vec3> d2p;   // n * n
  };
  std::vector<ContactGeom> geom(contacts.size());
  {
    int row = 0;
    for (size_t c = 0; c < contacts.size(); ++c) {
      const ContactPoint& cp = contacts[c];
      ContactGeom& g = geom[c];
      g.body = cp.body;
      g.row = row;
      g.bar = liftContactForce(cp, lambda, row);
      g.p = kin.bodyToGround[cp.body].applyPoint(cp.point);
      g.dp.assign(n, Vec3::Zero());
      for (int e : chainDofs[cp.body]) g.dp[e] = lin(s[e]) + ang(s[e]).cross(g.p);
      g.d2p.assign(static_cast<size_t>(n) * n, Vec3::Zero());
      for (int e : chainDofs[cp.body])
        for (int f : chainDofs[cp.body]) {
          g.d2p[e * n + f] =
              lin(dsAt(e, f)) + ang(dsAt(e, f)).cross(g.p) + ang(s[e]).cross(g.dp[f]);
        }
      row += cp.dim;
    }
  }

  std::vector<Vec6> Fext(nb, Vec6::Zero());
  std::vector<Vec6> dFext(nb * n, Vec6::Zero());
  std::vector<Vec6> d2Fext;
  if (so) d2Fext.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
  for (const ContactGeom& g : geom) {
    Vec6 w;
    w << g.p.cross(g.bar), g.bar;
    Fext[g.body] += w;
    for (int e : chainDofs[g.body]) {
      Vec6 dw;
      dw << g.dp[e].cross(g.bar), Vec3::Zero();
      dFext[g.body * n + e] += dw;
    }
    if (so) {
      for (int e : chainDofs[g.body])
        for (int f : chainDofs[g.body]) {
          Vec6 d2w;
          d2w << g.d2p[e * n + f].cross(g.bar), Vec3::Zero();
          d2Fext[(g.body * n + e) * n + f] += d2w;
        }
    }
  }

  // ---- Per-body net forces and their partials. ----
  auto cfd = [](const Vec6& x) { return crossForceOperator(x); };
  std::vector<Vec6> f(nb), dfQ(nb * n, Vec6::Zero()), dfQd(nb * n, Vec6::Zero());
  std::vector<Vec6> d2fQq, d2fQdQd, d2fQdQ;
  if (so) {
    d2fQq.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
    d2fQdQd.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
    d2fQdQ.assign(static_cast<size_t>(nb) * n * n, Vec6::Zero());
  }

  for (int i = 0; i < nb; ++i) {
    const Mat6& Ii = I[i];
    const Vec6& vi = v[i];
    const Vec6 Iv = Ii * vi;
    f[i] = Ii * a[i] + crossForce(vi, Iv) - Fext[i];

    for (int e : chainDofs[i]) {
      const Mat6& dIe = dIAt(i, e);
      const Vec6& dve = dvAt(i, e);
      dfQ[i * n + e] = dIe * a[i] + Ii * daAt(i, e) + cfd(dve) * Iv +
                       crossForce(vi, Vec6(dIe * vi + Ii * dve)) - dFext[i * n + e];
      dfQd[i * n + e] =
          Ii * dadAt(i, e) + cfd(s[e]) * Iv + crossForce(vi, Vec6(Ii * s[e]));
    }

    if (so) {
      for (int e : chainDofs[i]) {
        const Mat6& dIe = dIAt(i, e);
        const Vec6& dve = dvAt(i, e);
        for (int fdof : chainDofs[i]) {
          const Mat6& dIf = dIAt(i, fdof);
          const Vec6& dvf = dvAt(i, fdof);
          const Mat6& d2Ief = d2IAt(i, e, fdof);
          const Vec6& d2vef = at2(d2vQq, i, e, fdof);
          // (q, q)
          at2(d2fQq, i, e, fdof) =
              d2Ief * a[i] + dIe * daAt(i, fdof) + dIf * daAt(i, e) + Ii * at2(d2aQq, i, e, fdof) +
              cfd(d2vef) * Iv + cfd(dve) * (dIf * vi + Ii * dvf) +
              cfd(dvf) * (dIe * vi + Ii * dve) +
              crossForce(vi, Vec6(d2Ief * vi + dIe * dvf + dIf * dve + Ii * d2vef)) -
              d2Fext[(i * n + e) * n + fdof];
          // (qd, qd)
          at2(d2fQdQd, i, e, fdof) = Ii * at2(d2aQdQd, i, e, fdof) +
                                     cfd(s[e]) * (Ii * s[fdof]) + cfd(s[fdof]) * (Ii * s[e]);
          // (qd, q): columns = qd_e, pages = q_f.
          const Vec6& dsef = dsAt(e, fdof);
          at2(d2fQdQ, i, e, fdof) =
              dIf * dadAt(i, e) + Ii * at2(d2aQdQ, i, e, fdof) + cfd(dsef) * Iv +
              cfd(s[e]) * (dIf * vi + Ii * dvf) + cfd(dvf) * (Ii * s[e]) +
              crossForce(vi, Vec6(dIf * s[e] + Ii * dsef));
        }
      }
    }
  }

  // ---- Accumulate children into parents (cumulative forces). ----
  dFextCum = dFext;
  for (int i = nb - 1; i > 0; --i) {
    const int parent = tree.bodies[i].parent;
    f[parent] += f[i];
    for (int e = 0; e < n; ++e) {
      dfQ[parent * n + e] += dfQ[i * n + e];
      dfQd[parent * n + e] += dfQd[i * n + e];
      dFextCum[parent * n + e] += dFextCum[i * n + e];
    }
    if (so) {
      for (int e = 0; e < n; ++e)
        for (int g = 0; g < n; ++g) {
          d2fQq[(parent * n + e) * n + g] += d2fQq[(i * n + e) * n + g];
          d2fQdQd[(parent * n + e) * n + g] += d2fQdQd[(i * n + e) * n + g];
          d2fQdQ[(parent * n + e) * n + g] += d2fQdQ[(i * n + e) * n + g];
        }
    }
  }

  // ---- Project onto the joint subspaces. ----
  tau.resize(n);
  dtauDq = MatX::Zero(n, n);
  dtauDqd = MatX::Zero(n, n);
  if (so) {
    d2tauQq = Tensor3::Zero(n, n, n);
    d2tauQdQd = Tensor3::Zero(n, n, n);
    d2tauQdQ = Tensor3::Zero(n, n, n);
  }
  for (int d = 0; d < n; ++d) {
    const int i = tree.dofBody(d);
    tau(d) = s[d].dot(f[i]);
    for (int e = 0; e < n; ++e) {
      dtauDq(d, e) = dsAt(d, e).dot(f[i]) + s[d].dot(dfQ[i * n + e]);
      dtauDqd(d, e) = s[d].dot(dfQd[i * n + e]);
    }
    if (so) {
      for (int e = 0; e < n; ++e)
        for (int g = 0; g < n; ++g) {
          d2tauQq(d, e, g) = d2sAt(d, e, g).dot(f[i]) + dsAt(d, e).dot(dfQ[i * n + g]) +
                             dsAt(d, g).dot(dfQ[i * n + e]) + s[d].dot(d2fQq[(i * n + e) * n + g]);
          d2tauQdQd(d, e, g) = s[d].dot(d2fQdQd[(i * n + e) * n + g]);
          d2tauQdQ(d, e, g) =
              dsAt(d, g).dot(dfQd[i * n + e]) + s[d].dot(d2fQdQ[(i * n + e) * n + g]);
        }
    }
  }

  // ---- Mass matrix and its configuration derivative. ----
  std::vector<Mat6> IC = I;
  std::vector<Mat6> dIC = dI;
  for (int i = nb - 1; i > 0; --i) {
    const int parent = tree.bodies[i].parent;
    IC[parent] += IC[i];
    for (int e = 0; e < n; ++e) dIC[parent * n + e] += dIC[i * n + e];
  }
  M = MatX::Zero(n, n);
  dM = Tensor3::Zero(n, n, n);
  for (int d = 0; d < n; ++d) {
    const int i = tree.dofBody(d);
    for (int ad = 0; ad <= d; ++ad) {
      if (!pre(ad, d)) continue;
      M(d, ad) = s[ad].dot(IC[i] * s[d]);
      M(ad, d) = M(d, ad);
      for (int e = 0; e < n; ++e) {
        const double val = dsAt(ad, e).dot(IC[i] * s[d]) + s[ad].dot(dIC[i * n + e] * s[d]) +
                           s[ad].dot(IC[i] * dsAt(d, e));
        dM(d, ad, e) = val;
        dM(ad, d, e) = val;
      }
    }
  }

  // ---- Contact Jacobian rows and derivatives. ----
  Jc = MatX::Zero(nc, n);
  dJc = Tensor3::Zero(nc, n, n);
  d2Jc.clear();
  if (so) d2Jc.assign(n, Tensor3::Zero(nc, n, n));
  acc = VecX::Zero(nc);
  dAccDq = MatX::Zero(nc, n);
  dAccDqd = MatX::Zero(nc, n);
  if (so) {
    d2accQq = Tensor3::Zero(nc, n, n);
    d2accQdQd = Tensor3::Zero(nc, n, n);
    d2accQdQ = Tensor3::Zero(nc, n, n);
  }

  for (size_t c = 0; c < contacts.size(); ++c) {
    const ContactPoint& cp = contacts[c];
    const ContactGeom& g = geom[c];
    const int i = cp.body;
    const auto& dofs = chainDofs[i];

    // Jacobian columns jcCol[d] = d p / d q_d and their q-derivatives.
    std::vector<Vec3> jcCol(n, Vec3::Zero());
    for (int d : dofs) jcCol[d] = g.dp[d];
    for (int d : dofs) {
      scatterRows(cp, jcCol[d], g.row, d, Jc);
      for (int e : dofs) {
        const Vec3 col =
            lin(dsAt(d, e)) + ang(dsAt(d, e)).cross(g.p) + ang(s[d]).cross(g.dp[e]);
        scatterRows(cp, col, g.row, d, e, dJc);
        if (so) {
          for (int ff : dofs) {
            const Vec3 col2 = lin(d2sAt(d, e, ff)) + ang(d2sAt(d, e, ff)).cross(g.p) +
                              ang(dsAt(d, e)).cross(g.dp[ff]) + ang(dsAt(d, ff)).cross(g.dp[e]) +
                              ang(s[d]).cross(g.d2p[e * n + ff]);
            scatterRows(cp, col2, g.row, d, ff, d2Jc[e]);
          }
        }
      }
    }

    // Point acceleration rows from the kinematic body acceleration.
    const Vec6 aK = a[i] - a0;
    const Vec6& vi = v[i];
    const Vec3 pdot = lin(vi) + ang(vi).cross(g.p);
    const Vec3 accPt = lin(aK) + ang(aK).cross(g.p) + ang(vi).cross(pdot);
    scatterRows(cp, accPt, g.row, acc);

    std::vector<Vec3> dpdotQ(n, Vec3::Zero());
    for (int e : dofs) {
      const Vec6& dve = dvAt(i, e);
      dpdotQ[e] = lin(dve) + ang(dve).cross(g.p) + ang(vi).cross(g.dp[e]);
      const Vec6& dae = daAt(i, e);
      const Vec3 daccE = lin(dae) + ang(dae).cross(g.p) + ang(aK).cross(g.dp[e]) +
                         ang(dve).cross(pdot) + ang(vi).cross(dpdotQ[e]);
      scatterRows(cp, daccE, g.row, e, dAccDq);

      const Vec6& dade = dadAt(i, e);
      const Vec3 daccDqd =
          lin(dade) + ang(dade).cross(g.p) + ang(s[e]).cross(pdot) + ang(vi).cross(jcCol[e]);
      scatterRows(cp, daccDqd, g.row, e, dAccDqd);
    }

    if (so) {
      for (int e : dofs) {
        const Vec6& dve = dvAt(i, e);
        const Vec6& dade = dadAt(i, e);
        for (int ff : dofs) {
          const Vec6& dvf = dvAt(i, ff);
          // (q, q)
          const Vec6& d2a = at2(d2aQq, i, e, ff);
          const Vec6& d2v = at2(d2vQq, i, e, ff);
          const Vec3& d2pef = g.d2p[e * n + ff];
          const Vec3 d2pdot = lin(d2v) + ang(d2v).cross(g.p) + ang(dve).cross(g.dp[ff]) +
                              ang(dvf).cross(g.dp[e]) + ang(vi).cross(d2pef);
          const Vec3 rowQq = lin(d2a) + ang(d2a).cross(g.p) + ang(daAt(i, e)).cross(g.dp[ff]) +
                             ang(daAt(i, ff)).cross(g.dp[e]) + ang(aK).cross(d2pef) +
                             ang(d2v).cross(pdot) + ang(dve).cross(dpdotQ[ff]) +
                             ang(dvf).cross(dpdotQ[e]) + ang(vi).cross(d2pdot);
          scatterRows(cp, rowQq, g.row, e, ff, d2accQq);

          // (qd, qd)
          const Vec6& d2add = at2(d2aQdQd, i, e, ff);
          const Vec3 rowQdQd = lin(d2add) + ang(d2add).cross(g.p) +
                               ang(s[e]).cross(jcCol[ff]) + ang(s[ff]).cross(jcCol[e]);
          scatterRows(cp, rowQdQd, g.row, e, ff, d2accQdQd);

          // (qd, q): columns = qd_e, pages = q_f.
          const Vec6& d2adq = at2(d2aQdQ, i, e, ff);
          const Vec6& dsef = dsAt(e, ff);
          const Vec3 djcColEF =
              lin(dsef) + ang(dsef).cross(g.p) + ang(s[e]).cross(g.dp[ff]);
          const Vec3 rowQdQ = lin(d2adq) + ang(d2adq).cross(g.p) + ang(dade).cross(g.dp[ff]) +
                              ang(dsef).cross(pdot) + ang(s[e]).cross(dpdotQ[ff]) +
                              ang(dvf).cross(jcCol[e]) + ang(vi).cross(djcColEF);
          scatterRows(cp, rowQdQ, g.row, e, ff, d2accQdQ);
        }
      }
    }
  }
}

}  // namespace detail
}  // namespace rbd
