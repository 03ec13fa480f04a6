#include "egstokes/assembly.hpp"

#include <algorithm>
#include <stdexcept>
#include <unsupported/Eigen/SparseExtra>

namespace egstokes {

namespace {

using Triplet = Eigen::Triplet<double>;

// Routes global velocity-index triplets into the D/C block lists.
struct SplitTriplets {
  Index nD;
  std::vector<Triplet> DD, DC, CD, CC;

  void add(Index i, Index j, double v) {
    if (i < nD) {
      if (j < nD) DD.emplace_back(i, j, v);
      else DC.emplace_back(i, j - nD, v);
    } else {
      if (j < nD) CD.emplace_back(i - nD, j, v);
      else CC.emplace_back(i - nD, j - nD, v);
    }
  }
};

SpMat from_triplets(Index rows, Index cols, const std::vector<Triplet>& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Velocity basis restricted to one element: local 0 is Phi_K, local
// 1 + d*i + c is lambda_i e_c.
struct LocalBasis {
  int n = 0;
  std::array<Index, 13> global{};
  std::array<Mat3, 13> grad{};
  std::array<Vec3, 4> bary_grad{};
};

LocalBasis local_basis(const SimplicialMesh& mesh, const DofLayout& layout, Index k) {
  const int d = mesh.dim();
  LocalBasis b;
  b.bary_grad = p1_gradients(mesh, k);
  b.n = 1 + d * (d + 1);
  b.global[0] = layout.enrichment(k);
  b.grad[0] = spatial_identity(d);
  const auto el = mesh.element(k);
  for (int i = 0; i <= d; ++i) {
    for (int c = 0; c < d; ++c) {
      const int a = 1 + d * i + c;
      b.global[a] = layout.continuous(el[i], c);
      b.grad[a] = Mat3::Zero();
      b.grad[a].row(c) = b.bary_grad[i].transpose();
    }
  }
  return b;
}

// Values of all local basis functions at x.
std::array<Vec3, 13> local_values(const SimplicialMesh& mesh, const LocalBasis& b, Index k, const Vec3& x) {
  const int d = mesh.dim();
  std::array<Vec3, 13> v{};
  const Vec3 dx = x - mesh.centroid(k);
  v[0] = dx;
  for (int i = 0; i <= d; ++i) {
    const double lam = 1.0 / (d + 1) + b.bary_grad[i].dot(dx);
    for (int c = 0; c < d; ++c) {
      v[1 + d * i + c] = Vec3::Zero();
      v[1 + d * i + c][c] = lam;
    }
  }
  return v;
}

struct FacetPoints {
  std::vector<Vec3> x;
  std::vector<double> w;  // includes |e|
};

FacetPoints facet_points(const SimplicialMesh& mesh, const Facet& f, int degree) {
  const int d = mesh.dim();
  const QuadratureRule& q = quadrature_rule(d - 1, degree);
  std::array<Vec3, 3> corners;
  for (int c = 0; c < d; ++c) corners[c] = mesh.vertex(f.vertices[c]);
  FacetPoints out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.x.push_back(barycentric_to_point(q.points[i], {corners.data(), std::size_t(d)}));
    out.w.push_back(q.weights[i] * f.measure);
  }
  return out;
}

struct ElementPoints {
  std::vector<Vec3> x;
  std::vector<double> w;  // includes |K|
};

ElementPoints element_points(const SimplicialMesh& mesh, Index k, int degree) {
  const int d = mesh.dim();
  const QuadratureRule& q = quadrature_rule(d, degree);
  const auto el = mesh.element(k);
  std::array<Vec3, 4> corners;
  for (int i = 0; i <= d; ++i) corners[i] = mesh.vertex(el[i]);
  ElementPoints out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.x.push_back(barycentric_to_point(q.points[i], {corners.data(), std::size_t(d + 1)}));
    out.w.push_back(q.weights[i] * mesh.volume(k));
  }
  return out;
}

// One velocity DoF seen from a facet: {grad phi} n_e and [[phi]] at the
// facet quadrature points.
struct FacetDof {
  Index global;
  Vec3 avg_flux;
  std::vector<Vec3> jump;
};

}  // namespace

VelocityBlocks assemble_a(const SimplicialMesh& mesh, const DofLayout& layout, double nu, double rho) {
  const Index nD = layout.num_enrichment();
  SplitTriplets t{nD, {}, {}, {}, {}};

  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const LocalBasis b = local_basis(mesh, layout, k);
    const double vol = mesh.volume(k);
    for (int a = 0; a < b.n; ++a) {
      for (int c = 0; c < b.n; ++c) {
        const double v = nu * vol * (b.grad[a].cwiseProduct(b.grad[c])).sum();
        if (v != 0.0) t.add(b.global[a], b.global[c], v);
      }
    }
  }

  std::vector<FacetDof> dofs;
  for (const Facet& f : mesh.facets()) {
    const FacetPoints fp = facet_points(mesh, f, 2);
    const std::size_t nq = fp.x.size();
    const bool boundary = f.is_boundary();
    dofs.clear();

    auto add_side = [&](Index k, double jump_sign, double avg_weight) {
      const LocalBasis b = local_basis(mesh, layout, k);
      std::vector<std::array<Vec3, 13>> vals(nq);
      for (std::size_t q = 0; q < nq; ++q) vals[q] = local_values(mesh, b, k, fp.x[q]);
      for (int a = 0; a < b.n; ++a) {
        auto it = std::find_if(dofs.begin(), dofs.end(), [&](const FacetDof& x) { return x.global == b.global[a]; });
        if (it == dofs.end()) {
          dofs.push_back({b.global[a], Vec3::Zero(), std::vector<Vec3>(nq, Vec3::Zero())});
          it = dofs.end() - 1;
        }
        it->avg_flux += avg_weight * b.grad[a] * f.normal;
        // Continuous functions do not jump across interior facets.
        if (boundary || a == 0) {
          for (std::size_t q = 0; q < nq; ++q) it->jump[q] += jump_sign * vals[q][a];
        }
      }
    };
    if (boundary) {
      add_side(f.plus, 1.0, 1.0);
    } else {
      add_side(f.plus, 1.0, 0.5);
      add_side(f.minus, -1.0, 0.5);
    }

    const double pen = rho / f.h;
    for (const FacetDof& r : dofs) {
      for (const FacetDof& c : dofs) {
        double v = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
          v += fp.w[q] * (-c.avg_flux.dot(r.jump[q]) - r.avg_flux.dot(c.jump[q]) + pen * r.jump[q].dot(c.jump[q]));
        }
        if (v != 0.0) t.add(r.global, c.global, nu * v);
      }
    }
  }

  const Index nC = layout.num_continuous();
  return {from_triplets(nD, nD, t.DD), from_triplets(nD, nC, t.DC), from_triplets(nC, nD, t.CD),
          from_triplets(nC, nC, t.CC)};
}

CouplingBlocks assemble_b(const SimplicialMesh& mesh, const DofLayout& layout) {
  const int d = mesh.dim();
  std::vector<Triplet> tD, tC;
  // G = -B, so every b contribution enters with a minus sign.
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const auto el = mesh.element(k);
    const auto grads = p1_gradients(mesh, k);
    const double vol = mesh.volume(k);
    tD.emplace_back(k, k, -d * vol);
    for (int i = 0; i <= d; ++i) {
      for (int c = 0; c < d; ++c) tC.emplace_back(layout.continuous_local(el[i], c), k, -vol * grads[i][c]);
    }
  }
  for (const Facet& f : mesh.facets()) {
    const double flux_plus = f.measure * (f.centroid - mesh.centroid(f.plus)).dot(f.normal);
    if (f.is_boundary()) {
      tD.emplace_back(f.plus, f.plus, flux_plus);
      // int_e lambda_v = |e|/d for each facet vertex.
      for (int j = 0; j < d; ++j) {
        for (int c = 0; c < d; ++c) {
          tC.emplace_back(layout.continuous_local(f.vertices[j], c), f.plus, f.measure / d * f.normal[c]);
        }
      }
      continue;
    }
    const double flux_minus = f.measure * (f.centroid - mesh.centroid(f.minus)).dot(f.normal);
    // [[Phi_{K+}]].n = +Phi.n, [[Phi_{K-}]].n = -Phi.n, {chi_T} = 1/2 on both sides.
    for (Index T : {f.plus, f.minus}) {
      tD.emplace_back(f.plus, T, 0.5 * flux_plus);
      tD.emplace_back(f.minus, T, -0.5 * flux_minus);
    }
  }
  return {from_triplets(layout.num_enrichment(), layout.num_pressure(), tD),
          from_triplets(layout.num_continuous(), layout.num_pressure(), tC)};
}

double enrichment_facet_flux(const SimplicialMesh& mesh, Index k, int local_facet) {
  const Facet& f = mesh.facet(mesh.element_facet(k, local_facet));
  if (f.is_boundary()) return 0.0;
  return 0.5 * f.measure * (f.centroid - mesh.centroid(k)).dot(f.normal);
}

Vec3 rt0_shape(const SimplicialMesh& mesh, Index k, int local_facet, const Vec3& x) {
  const Vec3& p = mesh.vertex(mesh.element(k)[local_facet]);
  return (x - p) / (mesh.dim() * mesh.volume(k));
}

namespace {

// +1 when n_e is the outward normal of element k.
double facet_sign(const Facet& f, Index k) { return f.plus == k ? 1.0 : -1.0; }

}  // namespace

CouplingBlocks assemble_b_reconstructed(const SimplicialMesh& mesh, const DofLayout& layout) {
  const int d = mesh.dim();
  std::vector<Triplet> tD, tC;
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const auto el = mesh.element(k);
    const auto grads = p1_gradients(mesh, k);
    const double vol = mesh.volume(k);
    for (int i = 0; i <= d; ++i) {
      for (int c = 0; c < d; ++c) tC.emplace_back(layout.continuous_local(el[i], c), k, -vol * grads[i][c]);
    }
    // (div R Phi_K, chi_T) = sum over facets of T of sigma_T c_e.
    for (int i = 0; i <= d; ++i) {
      const Facet& f = mesh.facet(mesh.element_facet(k, i));
      if (f.is_boundary()) continue;
      const double c = enrichment_facet_flux(mesh, k, i);
      tD.emplace_back(k, f.plus, -c);
      tD.emplace_back(k, f.minus, c);
    }
  }
  return {from_triplets(layout.num_enrichment(), layout.num_pressure(), tD),
          from_triplets(layout.num_continuous(), layout.num_pressure(), tC)};
}

SpMat assemble_pressure_mass(const SimplicialMesh& mesh, const DofLayout& layout) {
  std::vector<Triplet> t;
  for (Index k = 0; k < mesh.num_elements(); ++k) t.emplace_back(k, k, mesh.volume(k));
  return from_triplets(layout.num_pressure(), layout.num_pressure(), t);
}

ReconstructedField::ReconstructedField(const SimplicialMesh& mesh, const DofLayout& layout, Vec coefficients)
    : mesh_(&mesh), layout_(&layout), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() < layout.num_velocity()) {
    throw std::invalid_argument("reconstruct: coefficient vector shorter than the velocity space");
  }
  flux_ = Vec::Zero(mesh.num_facets());
  for (Index k = 0; k < mesh.num_elements(); ++k) {
    const double ck = coefficients_[layout.enrichment(k)];
    for (int i = 0; i <= mesh.dim(); ++i) flux_[mesh.element_facet(k, i)] += ck * enrichment_facet_flux(mesh, k, i);
  }
}

Vec3 ReconstructedField::rt0_value(Index k, const Vec3& x) const {
  Vec3 out = Vec3::Zero();
  for (int i = 0; i <= mesh_->dim(); ++i) {
    const Index fi = mesh_->element_facet(k, i);
    out += facet_sign(mesh_->facet(fi), k) * flux_[fi] * rt0_shape(*mesh_, k, i, x);
  }
  return out;
}

Vec3 ReconstructedField::value(Index k, const Vec3& x) const {
  const EgFunction v(*mesh_, *layout_, {coefficients_.data(), std::size_t(coefficients_.size())});
  return v.continuous_part(k, x) + rt0_value(k, x);
}

double ReconstructedField::divergence(Index k) const {
  const int d = mesh_->dim();
  const auto el = mesh_->element(k);
  const auto grads = p1_gradients(*mesh_, k);
  double div = 0.0;
  for (int i = 0; i <= d; ++i) {
    for (int c = 0; c < d; ++c) div += coefficients_[layout_->continuous(el[i], c)] * grads[i][c];
    const Index fi = mesh_->element_facet(k, i);
    div += facet_sign(mesh_->facet(fi), k) * flux_[fi] / mesh_->volume(k);
  }
  return div;
}

Vec ReconstructedField::divergences() const {
  Vec out(mesh_->num_elements());
  for (Index k = 0; k < mesh_->num_elements(); ++k) out[k] = divergence(k);
  return out;
}

ReconstructedField reconstruct(const SimplicialMesh& mesh, const DofLayout& layout, const Vec& coefficients) {
  return {mesh, layout, coefficients};
}

LoadVectors assemble_load(const SimplicialMesh& mesh, const DofLayout& layout, const VectorField& f, LoadMode mode) {
  const int d = mesh.dim();
  const Index nE = mesh.num_elements();
  LoadVectors out{Vec::Zero(layout.num_enrichment()), Vec::Zero(layout.num_continuous())};
  // rt[k][i] = int_K f . psi_{K,i}, only needed for the reconstructed load.
  std::vector<std::array<double, 4>> rt(mode == LoadMode::reconstructed ? nE : 0, {0.0, 0.0, 0.0, 0.0});

  for (Index k = 0; k < nE; ++k) {
    const auto el = mesh.element(k);
    const auto grads = p1_gradients(mesh, k);
    const ElementPoints ep = element_points(mesh, k, 5);
    for (std::size_t q = 0; q < ep.x.size(); ++q) {
      const Vec3 fx = f(ep.x[q]);
      const Vec3 dx = ep.x[q] - mesh.centroid(k);
      for (int i = 0; i <= d; ++i) {
        const double lam = 1.0 / (d + 1) + grads[i].dot(dx);
        for (int c = 0; c < d; ++c) out.f_C[layout.continuous_local(el[i], c)] += ep.w[q] * fx[c] * lam;
      }
      if (mode == LoadMode::plain) {
        out.f_D[k] += ep.w[q] * fx.dot(dx);
      } else {
        for (int i = 0; i <= d; ++i) rt[k][i] += ep.w[q] * fx.dot(rt0_shape(mesh, k, i, ep.x[q]));
      }
    }
  }

  if (mode == LoadMode::reconstructed) {
    for (Index k = 0; k < nE; ++k) {
      for (int i = 0; i <= d; ++i) {
        const Facet& fc = mesh.facet(mesh.element_facet(k, i));
        if (fc.is_boundary()) continue;
        const double c = enrichment_facet_flux(mesh, k, i);
        out.f_D[k] += c * (rt[fc.plus][fc.plus_local] - rt[fc.minus][fc.minus_local]);
      }
    }
  }
  return out;
}

BoundaryData assemble_boundary_data(const SimplicialMesh& mesh, const DofLayout& layout, const VectorField& g,
                                    double nu, double rho) {
  const int d = mesh.dim();
  BoundaryData out;
  out.momentum_D = Vec::Zero(layout.num_enrichment());
  out.momentum_C = Vec::Zero(layout.num_continuous());
  out.continuity = Vec::Zero(layout.num_pressure());
  out.boundary_dofs = layout.boundary_continuous_dofs();
  out.boundary_values.resize(out.boundary_dofs.size());
  for (std::size_t j = 0; j < out.boundary_dofs.size(); ++j) {
    const Index pos = out.boundary_dofs[j];
    out.boundary_values[j] = g(mesh.vertex(pos / d))[pos % d];
  }

  const Index nD = layout.num_enrichment();
  for (const Facet& f : mesh.facets()) {
    if (!f.is_boundary()) continue;
    const Index k = f.plus;
    const LocalBasis b = local_basis(mesh, layout, k);
    const FacetPoints fp = facet_points(mesh, f, 5);
    for (std::size_t q = 0; q < fp.x.size(); ++q) {
      const Vec3 gx = g(fp.x[q]);
      const auto vals = local_values(mesh, b, k, fp.x[q]);
      for (int a = 0; a < b.n; ++a) {
        const double v = nu * fp.w[q] * (-(b.grad[a] * f.normal).dot(gx) + rho / f.h * vals[a].dot(gx));
        const Index gi = b.global[a];
        if (gi < nD) out.momentum_D[gi] += v;
        else out.momentum_C[gi - nD] += v;
      }
      out.continuity[k] -= fp.w[q] * gx.dot(f.normal);
    }
  }
  return out;
}

SpMat assemble_perturbed(const SpMat& A_DD) {
  const Vec diag = A_DD.diagonal();
  SpMat D(A_DD.rows(), A_DD.cols());
  std::vector<Triplet> t;
  for (Index i = 0; i < diag.size(); ++i) t.emplace_back(i, i, diag[i]);
  D.setFromTriplets(t.begin(), t.end());
  D.makeCompressed();
  return D;
}

void write_matrix_market(const SpMat& m, const std::string& path) {
  if (!Eigen::saveMarket(m, path)) throw std::runtime_error("write_matrix_market: cannot write " + path);
}

}  // namespace egstokes
