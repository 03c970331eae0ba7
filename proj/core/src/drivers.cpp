#include "avsfe/drivers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "avsfe/io.hpp"

namespace avsfe {

Mesh problem_mesh(const ProblemSpec& spec, int nx, int ny) {
  return build_rectangle_mesh(spec.domain[0], spec.domain[1], spec.domain[2], spec.domain[3], nx,
                              ny, default_tags(spec));
}

ErrorReport converge_spacetime(const ProblemSpec& spec, int p, int levels, int nx0, int nt0,
                               const FormOptions& opts) {
  if (spec.mode != ProblemMode::spacetime)
    throw std::invalid_argument("converge_spacetime: problem is not in spacetime mode");
  if (levels < 1) throw std::invalid_argument("converge_spacetime: levels must be >= 1");

  ErrorReport report;
  for (int l = 0; l < levels; ++l) {
    const Mesh mesh = problem_mesh(spec, nx0 << l, nt0 << l);
    const SpacesBundle sb = make_spaces(mesh, ProblemMode::spacetime, p);
    const Solution sol = solve(spacetime_system(spec, sb, opts));

    LevelRecord rec;
    rec.level = l;
    rec.dofs = sb.n_trial() + sb.n_test();
    rec.h_max = mesh.h_max();
    rec.energy_estimate = sol.energy_estimate;
    if (spec.exact) {
      const ExactErrors ee =
          exact_errors(spec, sb, sol.x.head(sb.u.dof_count), sol.x.tail(sb.q.dof_count));
      rec.l2_u = ee.l2_u;
      rec.h1_u = ee.h1_u;
      rec.l2_q = ee.l2_q;
      rec.hdiv_q = ee.hdiv_q;
    }
    report.levels.push_back(rec);
  }
  return report;
}

ErrorReport converge_genalpha(const ProblemSpec& spec, int p, int levels, int nx0, int ny0,
                              double rho_inf, double tau, double t_final,
                              const FormOptions& opts) {
  if (spec.mode != ProblemMode::spatial)
    throw std::invalid_argument("converge_genalpha: problem is not in spatial mode");
  if (levels < 1) throw std::invalid_argument("converge_genalpha: levels must be >= 1");
  const GenAlphaParams params = make_params(rho_inf, tau);

  ErrorReport report;
  for (int l = 0; l < levels; ++l) {
    const Mesh mesh = problem_mesh(spec, nx0 << l, ny0 << l);
    const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, p);
    const MarchResult mr = march(spec, mesh, sb, params, t_final, opts);

    LevelRecord rec;
    rec.level = l;
    rec.dofs = sb.n_trial() + sb.n_test();
    rec.h_max = mesh.h_max();
    rec.energy_estimate = mr.steps.empty() ? 0.0 : mr.steps.back().energy_estimate;
    if (spec.exact) {
      const ExactErrors ee = exact_errors(spec, sb, mr.state.u, mr.state.q, mr.state.t_n);
      rec.l2_u = ee.l2_u;
      rec.h1_u = ee.h1_u;
      rec.l2_q = ee.l2_q;
      rec.hdiv_q = ee.hdiv_q;
    }
    report.levels.push_back(rec);
  }
  return report;
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * d - p).norm();
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  auto side = [](const Vec2& u, const Vec2& v, const Vec2& q) {
    return (v.x() - u.x()) * (q.y() - u.y()) - (v.y() - u.y()) * (q.x() - u.x());
  };
  const double s0 = side(a, b, p), s1 = side(b, c, p), s2 = side(c, a, p);
  return s0 >= 0 && s1 >= 0 && s2 >= 0; // CCW triangles
}

} // namespace

bool triangle_intersects_annulus(const Mesh& mesh, int t, const AnnulusBand& band) {
  const Vec2 a = mesh.vertices[mesh.triangles[t][0]];
  const Vec2 b = mesh.vertices[mesh.triangles[t][1]];
  const Vec2 c = mesh.vertices[mesh.triangles[t][2]];

  const double rmax =
      std::max({(a - band.center).norm(), (b - band.center).norm(), (c - band.center).norm()});
  double rmin = 0.0;
  if (!point_in_triangle(band.center, a, b, c))
    rmin = std::min({point_segment_distance(band.center, a, b),
                     point_segment_distance(band.center, b, c),
                     point_segment_distance(band.center, c, a)});
  return rmin <= band.r1 && rmax >= band.r0;
}

GaAdaptResult adapt_genalpha(const ProblemSpec& spec, int p, double theta, int rounds,
                             double rho_inf, double tau, double t_final, int nx0, int ny0,
                             const FormOptions& opts, const AnnulusBand* band) {
  if (rounds < 1) throw std::invalid_argument("adapt_genalpha: rounds must be >= 1");
  const GenAlphaParams params = make_params(rho_inf, tau);

  GaAdaptResult res;
  res.mesh = problem_mesh(spec, nx0, ny0);
  for (int r = 0; r < rounds; ++r) {
    const SpacesBundle sb = make_spaces(res.mesh, ProblemMode::spatial, p);
    const MarchResult mr = march(spec, res.mesh, sb, params, t_final, opts);
    const Eigen::VectorXd eta = mr.indicator_sq_accum.cwiseMax(0.0).cwiseSqrt();
    const std::vector<int> marked = dorfler_mark(eta, theta);

    GaAdaptRound round;
    round.round = r;
    round.dofs = sb.n_trial() + sb.n_test();
    round.estimate = std::sqrt(mr.indicator_sq_accum.sum());
    round.marked = static_cast<int>(marked.size());
    if (band)
      for (int id : marked)
        if (triangle_intersects_annulus(res.mesh, id, *band)) ++round.marked_in_band;
    res.rounds.push_back(round);

    if (r + 1 == rounds || marked.empty()) break;
    res.mesh = bisect(res.mesh, marked);
  }
  return res;
}

namespace {

namespace fs = std::filesystem;

std::string num(double v) { return fmt_double(v); }

std::vector<std::string> report_header() {
  return {"level", "dofs",  "h_max",    "L2_u",     "H1_u",
          "L2_q",  "Hdiv_q", "energy_estimate", "eoc_L2_u", "eoc_H1_u",
          "eoc_L2_q", "eoc_Hdiv_q", "eoc_energy"};
}

std::vector<std::vector<std::string>> report_rows(const ErrorReport& report) {
  const size_t n = report.levels.size();
  std::vector<double> hs(n), l2(n), h1(n), lq(n), dq(n), en(n);
  for (size_t i = 0; i < n; ++i) {
    const LevelRecord& r = report.levels[i];
    hs[i] = r.h_max;
    l2[i] = r.l2_u;
    h1[i] = r.h1_u;
    lq[i] = r.l2_q;
    dq[i] = r.hdiv_q;
    en[i] = r.energy_estimate;
  }
  const auto rl2 = eoc(l2, hs), rh1 = eoc(h1, hs), rlq = eoc(lq, hs), rdq = eoc(dq, hs),
             ren = eoc(en, hs);
  auto cell = [](const std::vector<std::optional<double>>& rates, size_t i) -> std::string {
    if (i == 0 || !rates[i - 1]) return "";
    return fmt_double(*rates[i - 1]);
  };

  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < n; ++i) {
    const LevelRecord& r = report.levels[i];
    rows.push_back({std::to_string(r.level), std::to_string(r.dofs), num(r.h_max), num(r.l2_u),
                    num(r.h1_u), num(r.l2_q), num(r.hdiv_q), num(r.energy_estimate),
                    cell(rl2, i), cell(rh1, i), cell(rlq, i), cell(rdq, i), cell(ren, i)});
  }
  return rows;
}

nlohmann::json report_json(const ErrorReport& report) {
  nlohmann::json levels = nlohmann::json::array();
  std::vector<double> hs, l2;
  for (const LevelRecord& r : report.levels) {
    levels.push_back({{"level", r.level},
                      {"dofs", r.dofs},
                      {"h_max", r.h_max},
                      {"L2_u", r.l2_u},
                      {"H1_u", r.h1_u},
                      {"L2_q", r.l2_q},
                      {"Hdiv_q", r.hdiv_q},
                      {"energy_estimate", r.energy_estimate}});
    hs.push_back(r.h_max);
    l2.push_back(r.l2_u);
  }
  nlohmann::json j;
  j["levels"] = levels;
  const auto rates = eoc(l2, hs);
  nlohmann::json jr = nlohmann::json::array();
  for (const auto& r : rates)
    jr.push_back(r ? nlohmann::json(*r) : nlohmann::json());
  j["eoc_L2_u"] = jr;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

// Vertex values of one component of an interleaved coefficient vector.
Eigen::VectorXd vertex_component(const Eigen::VectorXd& coeffs, int n_vertices, int components,
                                 int c) {
  Eigen::VectorXd out(n_vertices);
  for (int i = 0; i < n_vertices; ++i) out[i] = coeffs[i * components + c];
  return out;
}

void dump_solution_vtk(const std::string& path, const Mesh& mesh, const SpacesBundle& sb,
                       const Solution& sol, const IndicatorSet& ind) {
  const int nv = mesh.n_vertices();
  std::vector<std::pair<std::string, Eigen::VectorXd>> pts;
  pts.emplace_back("u", sol.x.head(sb.u.dof_count).head(nv));
  const Eigen::VectorXd q = sol.x.tail(sb.q.dof_count);
  if (sb.q.components == 1) {
    pts.emplace_back("q", q.head(nv));
  } else {
    pts.emplace_back("q_x", vertex_component(q, nv, 2, 0));
    pts.emplace_back("q_y", vertex_component(q, nv, 2, 1));
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> cells;
  cells.emplace_back("indicator", ind.eta);
  write_vtk(path, mesh, pts, cells);
}

ProblemSpec config_problem(const RunConfig& c) {
  try {
    return problem_by_name(c.problem, c.epsilon, c.steepness);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

FormOptions config_form(const RunConfig& c) {
  FormOptions f;
  f.quad_order = c.quad_order;
  f.strong_dirichlet = c.strong_dirichlet;
  return f;
}

void need_march_fields(const RunConfig& c, const char* mode) {
  if (!(c.tau > 0.0))
    throw ConfigError(std::string(mode) + ": field 'tau' must be > 0 for a spatial problem");
  if (!(c.t_final > 0.0))
    throw ConfigError(std::string(mode) + ": field 't_final' must be > 0 for a spatial problem");
}

} // namespace

void run_config(const RunConfig& c) {
  validate(c);
  const ProblemSpec spec = config_problem(c);
  const FormOptions form = config_form(c);
  fs::create_directories(c.out_dir);
  const std::string dir = c.out_dir + "/";

  if (c.mode == "spacetime") {
    if (spec.mode != ProblemMode::spacetime)
      throw ConfigError("spacetime mode: problem '" + c.problem + "' is not a space-time problem");
    const Mesh mesh = problem_mesh(spec, c.nx, c.nt);
    const SpacesBundle sb = make_spaces(mesh, spec.mode, c.p_u, c.p_q, c.dp);
    const Solution sol = solve(spacetime_system(spec, sb, form));
    const IndicatorSet ind = indicators(sb, sol.e);
    dump_solution_vtk(dir + "solution.vtk", mesh, sb, sol, ind);

    nlohmann::json j;
    j["mode"] = c.mode;
    j["problem"] = c.problem;
    j["dofs_trial"] = sb.n_trial();
    j["dofs_error_rep"] = sb.n_test();
    j["energy_estimate"] = sol.energy_estimate;
    j["orthogonality_inf"] = sol.orthogonality_inf;
    if (spec.exact) {
      const ExactErrors ee =
          exact_errors(spec, sb, sol.x.head(sb.u.dof_count), sol.x.tail(sb.q.dof_count));
      j["L2_u"] = ee.l2_u;
      j["H1_u"] = ee.h1_u;
      j["L2_q"] = ee.l2_q;
      j["Hdiv_q"] = ee.hdiv_q;
    }
    write_json(dir + "summary.json", j);
    return;
  }

  if (c.mode == "converge") {
    ErrorReport report;
    if (spec.mode == ProblemMode::spacetime) {
      report = converge_spacetime(spec, c.p_u, c.levels, c.nx, c.nt, form);
    } else {
      need_march_fields(c, "converge mode");
      report = converge_genalpha(spec, c.p_u, c.levels, c.nx, c.nt, c.rho_inf, c.tau, c.t_final,
                                 form);
    }
    write_csv(dir + "convergence.csv", report_header(), report_rows(report));
    nlohmann::json j = report_json(report);
    j["mode"] = c.mode;
    j["problem"] = c.problem;
    write_json(dir + "summary.json", j);
    return;
  }

  if (c.mode == "adapt") {
    if (spec.mode == ProblemMode::spacetime) {
      AdaptiveOptions aopts;
      aopts.p = c.p_u;
      aopts.theta = c.theta;
      aopts.max_steps = c.adapt_steps;
      aopts.estimate_tol = c.estimate_tol;
      aopts.form = form;
      aopts.observer = [&dir, &c](int step, const Mesh& m, const Solution& sol,
                                  const IndicatorSet& ind) {
        const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, c.p_u, c.p_q, c.dp);
        dump_solution_vtk(dir + "mesh_" + std::to_string(step) + ".vtk", m, sb, sol, ind);
      };
      const AdaptiveResult ar = adaptive_loop(spec, problem_mesh(spec, c.nx, c.nt), aopts);
      write_csv(dir + "adapt.csv", report_header(), report_rows(ar.report));
      nlohmann::json j = report_json(ar.report);
      j["mode"] = c.mode;
      j["problem"] = c.problem;
      write_json(dir + "summary.json", j);
    } else {
      need_march_fields(c, "adapt mode");
      const GaAdaptResult ar = adapt_genalpha(spec, c.p_u, c.theta, c.adapt_steps, c.rho_inf,
                                              c.tau, c.t_final, c.nx, c.nt, form);
      std::vector<std::vector<std::string>> rows;
      for (const GaAdaptRound& r : ar.rounds)
        rows.push_back({std::to_string(r.round), std::to_string(r.dofs), num(r.estimate),
                        std::to_string(r.marked)});
      write_csv(dir + "adapt.csv", {"round", "dofs", "estimate", "marked"}, rows);
      write_vtk(dir + "final_mesh.vtk", ar.mesh);
      nlohmann::json j;
      j["mode"] = c.mode;
      j["problem"] = c.problem;
      j["rounds"] = ar.rounds.size();
      write_json(dir + "summary.json", j);
    }
    return;
  }

  if (c.mode == "genalpha") {
    if (spec.mode != ProblemMode::spatial)
      throw ConfigError("genalpha mode: problem '" + c.problem + "' is not a spatial problem");
    const Mesh mesh = problem_mesh(spec, c.nx, c.nt);
    const SpacesBundle sb = make_spaces(mesh, spec.mode, c.p_u, c.p_q, c.dp);
    const GenAlphaParams params = make_params(c.rho_inf, c.tau);

    std::vector<std::vector<std::string>> rows;
    const MarchResult mr = march(spec, mesh, sb, params, c.t_final, form,
                                 [&rows](const StepRecord& rec, const GenAlphaState&) {
                                   rows.push_back({std::to_string(rec.step), num(rec.t),
                                                   num(rec.l2_u), num(rec.energy_estimate)});
                                 });
    write_csv(dir + "steps.csv", {"step", "t", "L2_u", "energy_estimate"}, rows);

    const int nv = mesh.n_vertices();
    std::vector<std::pair<std::string, Eigen::VectorXd>> pts;
    pts.emplace_back("u", mr.state.u.head(nv));
    pts.emplace_back("theta", mr.state.theta.head(nv));
    pts.emplace_back("q_x", vertex_component(mr.state.q, nv, 2, 0));
    pts.emplace_back("q_y", vertex_component(mr.state.q, nv, 2, 1));
    write_vtk(dir + "final.vtk", mesh, pts);

    nlohmann::json j;
    j["mode"] = c.mode;
    j["problem"] = c.problem;
    j["steps"] = mr.steps.size();
    j["dofs_trial"] = sb.n_trial();
    j["dofs_error_rep"] = sb.n_test();
    if (spec.exact) {
      const ExactErrors ee = exact_errors(spec, sb, mr.state.u, mr.state.q, mr.state.t_n);
      j["L2_u"] = ee.l2_u;
      j["H1_u"] = ee.h1_u;
    }
    write_json(dir + "summary.json", j);
    return;
  }

  if (c.mode == "slices") {
    if (spec.mode != ProblemMode::spacetime)
      throw ConfigError("slices mode: problem '" + c.problem + "' is not a space-time problem");
    SliceConfig sc;
    sc.boundaries = c.slice_boundaries;
    sc.nx = c.nx;
    sc.nt = c.nt;
    sc.p = c.p_u;
    sc.strategy = c.strategy == "after" ? SliceStrategy::adapt_after : SliceStrategy::adapt_between;
    sc.adapt_steps = c.adapt_steps;
    sc.theta = c.theta;
    sc.form = form;
    const SweepResult sr = sweep(spec, sc);

    std::vector<std::vector<std::string>> rows;
    for (const SliceRecord& r : sr.slices)
      rows.push_back({std::to_string(r.slice), num(r.t0), num(r.t1), std::to_string(r.max_dofs),
                      num(r.l2_u), num(r.h1_u), num(r.energy_estimate), num(r.transfer_jump)});
    write_csv(dir + "slices.csv",
              {"slice", "t0", "t1", "max_dofs", "L2_u", "H1_u", "energy_estimate",
               "transfer_jump"},
              rows);
    for (size_t k = 0; k < sr.meshes.size(); ++k)
      write_vtk(dir + "slice_" + std::to_string(k) + ".vtk", sr.meshes[k],
                {{"u", sr.u_vertex[k]}});

    nlohmann::json j;
    j["mode"] = c.mode;
    j["problem"] = c.problem;
    j["L2_total"] = sr.l2_total;
    j["log"] = sr.log;
    write_json(dir + "summary.json", j);
    return;
  }

  throw ConfigError("unknown mode: " + c.mode);
}

} // namespace avsfe
