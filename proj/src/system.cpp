#include "egstokes/system.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace egstokes {

namespace {

using Triplet = Eigen::Triplet<double>;

void append(std::vector<Triplet>& t, const SpMat& m, Index row0, Index col0, bool transpose = false) {
  for (int j = 0; j < m.outerSize(); ++j) {
    for (SpMat::InnerIterator it(m, j); it; ++it) {
      if (transpose) t.emplace_back(row0 + it.col(), col0 + it.row(), it.value());
      else t.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
    }
  }
}

SpMat assemble_2x2(const SpMat& A11, const SpMat& A12, const SpMat& A21, const SpMat& A22) {
  std::vector<Triplet> t;
  t.reserve(A11.nonZeros() + A12.nonZeros() + A21.nonZeros() + A22.nonZeros());
  append(t, A11, 0, 0);
  append(t, A12, 0, A11.cols());
  append(t, A21, A11.rows(), 0);
  append(t, A22, A11.rows(), A11.cols());
  SpMat m(A11.rows() + A21.rows(), A11.cols() + A12.cols());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SpMat saddle(const SpMat& A, const SpMat& G, const SpMat& C) {
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + 2 * G.nonZeros() + C.nonZeros());
  append(t, A, 0, 0);
  append(t, G, 0, A.cols());
  append(t, G, A.rows(), 0, true);
  append(t, C, A.rows(), A.cols());
  SpMat m(A.rows() + G.cols(), A.cols() + G.cols());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

Vec concat(std::initializer_list<const Vec*> parts) {
  Index n = 0;
  for (const Vec* p : parts) n += p->size();
  Vec out(n);
  Index o = 0;
  for (const Vec* p : parts) {
    out.segment(o, p->size()) = *p;
    o += p->size();
  }
  return out;
}

}  // namespace

Method parse_method(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s.size() > 3 && s.ends_with("-eg")) s.resize(s.size() - 3);
  if (s == "st") return Method::st;
  if (s == "pr") return Method::pr;
  if (s == "ppr") return Method::ppr;
  if (s == "cpr") return Method::cpr;
  throw std::invalid_argument("unknown method '" + name + "' (expected st, pr, ppr or cpr)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::st: return "ST-EG";
    case Method::pr: return "PR-EG";
    case Method::ppr: return "PPR-EG";
    case Method::cpr: return "CPR-EG";
  }
  return "?";
}

std::string method_key(Method m) {
  switch (m) {
    case Method::st: return "st";
    case Method::pr: return "pr";
    case Method::ppr: return "ppr";
    case Method::cpr: return "cpr";
  }
  return "?";
}

BlockSystem assemble_block_system(const SimplicialMesh& mesh, const DofLayout& layout, const VectorField& f,
                                  const VectorField& g, double nu, double rho) {
  BlockSystem s;
  s.dim = mesh.dim();
  s.nu = nu;
  s.rho = rho;
  VelocityBlocks a = assemble_a(mesh, layout, nu, rho);
  CouplingBlocks b = assemble_b(mesh, layout);
  s.M_p = assemble_pressure_mass(mesh, layout);
  const LoadVectors plain = assemble_load(mesh, layout, f, LoadMode::plain);
  const LoadVectors recon = assemble_load(mesh, layout, f, LoadMode::reconstructed);
  const BoundaryData bd = assemble_boundary_data(mesh, layout, g, nu, rho);

  s.f_D_plain = plain.f_D + bd.momentum_D;
  s.f_D_reconstructed = recon.f_D + bd.momentum_D;
  s.f_C = plain.f_C + bd.momentum_C;
  s.g_P = -bd.continuity;

  const Index nC = layout.num_continuous();
  Vec lift = Vec::Zero(nC);
  std::vector<bool> fixed(nC, false);
  for (std::size_t j = 0; j < bd.boundary_dofs.size(); ++j) {
    lift[bd.boundary_dofs[j]] = bd.boundary_values[j];
    fixed[bd.boundary_dofs[j]] = true;
  }
  const Vec lift_D = a.DC * lift;
  s.f_D_plain -= lift_D;
  s.f_D_reconstructed -= lift_D;
  s.f_C -= a.CC * lift;
  s.g_P -= b.C.transpose() * lift;

  const Vec diag = a.CC.diagonal();
  a.DC.prune([&](Index, Index j, double) { return !fixed[j]; });
  a.CD.prune([&](Index i, Index, double) { return !fixed[i]; });
  a.CC.prune([&](Index i, Index j, double) { return i == j || (!fixed[i] && !fixed[j]); });
  b.C.prune([&](Index i, Index, double) { return !fixed[i]; });
  for (Index dof : bd.boundary_dofs) s.f_C[dof] = diag[dof] * lift[dof];

  // Constant pressures span the kernel of G, so the continuity RHS must sum to zero.
  s.g_P.array() -= s.g_P.mean();

  s.A_DD = std::move(a.DD);
  s.A_DC = std::move(a.DC);
  s.A_CD = std::move(a.CD);
  s.A_CC = std::move(a.CC);
  s.G_D = std::move(b.D);
  s.G_C = std::move(b.C);
  s.boundary_dofs = bd.boundary_dofs;
  s.boundary_values = bd.boundary_values;
  return s;
}

CondensedSystem condense(const SpMat& D_DD, const SpMat& A_DC, const SpMat& A_CD, const SpMat& A_CC, const SpMat& G_D,
                         const SpMat& G_C, const Vec& f_D, const Vec& f_C, const Vec& g_P) {
  const Vec d = D_DD.diagonal();
  if ((d.array() <= 0.0).any()) {
    throw std::domain_error("condense: nonpositive diagonal entry in D_DD (penalty too small)");
  }
  CondensedSystem out;
  out.D_inv = d.cwiseInverse();
  const auto Dinv = out.D_inv.asDiagonal();
  const SpMat DinvA_DC = Dinv * A_DC;
  const SpMat DinvG_D = Dinv * G_D;
  out.A_u = A_CC - A_CD * DinvA_DC;
  out.G = G_C - A_CD * DinvG_D;
  out.A_p = SpMat(G_D.transpose()) * DinvG_D;
  out.A_u.makeCompressed();
  out.G.makeCompressed();
  out.A_p.makeCompressed();
  const Vec Dinv_f = out.D_inv.cwiseProduct(f_D);
  out.f_u = f_C - A_CD * Dinv_f;
  out.f_p = g_P - G_D.transpose() * Dinv_f;
  return out;
}

Vec recover_enrichment(const Vec& U_C, const Vec& P, const Vec& D_inv, const SpMat& A_DC, const SpMat& G_D,
                       const Vec& f_D) {
  return D_inv.cwiseProduct(f_D - A_DC * U_C - G_D * P);
}

StokesSystem build_system(Method method, const BlockSystem& s, std::span<const double> element_volumes) {
  StokesSystem out;
  out.method = method;
  out.nu = s.nu;
  out.M_p = s.M_p;
  out.element_volumes.assign(element_volumes.begin(), element_volumes.end());
  const Index nD = s.A_DD.rows();
  const Index nP = s.M_p.rows();
  out.n_enrichment = nD;
  out.n_pressure = nP;

  const Vec& f_D = method == Method::st ? s.f_D_plain : s.f_D_reconstructed;
  if (method == Method::cpr) {
    const SpMat D = assemble_perturbed(s.A_DD);
    CondensedSystem c = condense(D, s.A_DC, s.A_CD, s.A_CC, s.G_D, s.G_C, f_D, s.f_C, s.g_P);
    out.A_u = std::move(c.A_u);
    out.G = std::move(c.G);
    out.C = -c.A_p;
    out.rhs = concat({&c.f_u, &c.f_p});
    out.D_inv = std::move(c.D_inv);
    out.A_DC = s.A_DC;
    out.G_D = s.G_D;
    out.f_D = f_D;
    out.fixed_velocity = s.boundary_dofs;
  } else {
    const SpMat A_DD = method == Method::ppr ? assemble_perturbed(s.A_DD) : s.A_DD;
    out.A_u = assemble_2x2(A_DD, s.A_DC, s.A_CD, s.A_CC);
    SpMat empty_D(nD, 0), empty_C(s.G_C.rows(), 0);
    out.G = assemble_2x2(s.G_D, empty_D, s.G_C, empty_C);
    out.C = SpMat(nP, nP);
    out.rhs = concat({&f_D, &s.f_C, &s.g_P});
    for (Index b : s.boundary_dofs) out.fixed_velocity.push_back(nD + b);
  }
  out.n_velocity = out.A_u.rows();
  out.matrix = saddle(out.A_u, out.G, out.C);
  return out;
}

Vec expand_solution(const StokesSystem& system, const Vec& x) {
  if (system.method != Method::cpr) return x;
  const Vec U_C = x.head(system.n_velocity);
  const Vec P = x.tail(system.n_pressure);
  const Vec U_D = recover_enrichment(U_C, P, system.D_inv, system.A_DC, system.G_D, system.f_D);
  return concat({&U_D, &U_C, &P});
}

void project_pressure_mean(Vec& x, Index pressure_offset, std::span<const double> element_volumes) {
  const Index nP = static_cast<Index>(element_volumes.size());
  double mass = 0.0, weighted = 0.0;
  for (Index k = 0; k < nP; ++k) {
    mass += element_volumes[k];
    weighted += element_volumes[k] * x[pressure_offset + k];
  }
  x.segment(pressure_offset, nP).array() -= weighted / mass;
}

Vec solve_direct(const StokesSystem& system) {
  const Index n = system.matrix.rows();
  SpMat pinned = system.matrix;
  pinned.conservativeResize(n - 1, n - 1);
  pinned.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(pinned);
  lu.factorize(pinned);
  if (lu.info() != Eigen::Success) throw std::runtime_error("solve_direct: factorization failed: " + lu.lastErrorMessage());
  Vec x = Vec::Zero(n);
  const Vec b = system.rhs.head(n - 1);
  Vec y = lu.solve(b);
  // Two refinement sweeps; small nu otherwise leaves ~1e-9 noise in the velocity.
  for (int sweep = 0; sweep < 2; ++sweep) y += lu.solve(Vec(b - pinned * y));
  x.head(n - 1) = y;
  project_pressure_mean(x, system.n_velocity, system.element_volumes);
  return x;
}

Discretization discretize(SimplicialMesh mesh, const VectorField& f, const VectorField& g, double nu, double rho) {
  Discretization d{std::move(mesh), {}, {}};
  d.layout = DofLayout(d.mesh);
  d.blocks = assemble_block_system(d.mesh, d.layout, f, g, nu, rho);
  return d;
}

}  // namespace egstokes
