#include "qkd/pipeline.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "qkd/approx_diag.hpp"
#include "qkd/decoy.hpp"
#include "qkd/laser.hpp"

namespace qkd {

namespace {

const char* event_name(int e) {
  switch (static_cast<Event>(e)) {
    case Event::NoClick: return "no_click";
    case Event::ZEarly: return "z_early";
    case Event::ZLate: return "z_late";
    case Event::XMinus: return "x_minus";
    case Event::Multi: return "multi";
  }
  return "?";
}

// Run `work(index)` for indices [0, n) on up to `jobs` threads.  Exceptions
// are captured and rethrown on the caller thread.
void parallel_for(int n, int jobs, const std::function<void(int)>& work) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void run_characterise(const RunConfig& cfg, const std::string& out) {
  CsvWriter csv(out, cfg.hash);
  csv.header({"phase_model", "q", "visibility"});
  double v = cfg.has_visibility ? cfg.visibility : -1.0;
  csv.row({"delta_mix", CsvWriter::num(cfg.q_for(PhaseModel::DeltaMix)),
           CsvWriter::num(v)});
  csv.row({"wrapped_normal",
           CsvWriter::num(cfg.q_for(PhaseModel::WrappedNormal)),
           CsvWriter::num(v)});
  csv.close();
}

void run_simulate(const RunConfig& cfg, const std::string& out) {
  CsvWriter csv(out, cfg.hash);
  csv.header({"distance_km", "signal", "intensity", "no_click", "z_early",
              "z_late", "x_minus", "multi", "cross_click"});
  for (double dist : cfg.sweep_distances_km) {
    ProtocolParams p = cfg.protocol;
    p.distance_km = dist;
    Statistics st = simulate_statistics(p);
    for (size_t s = 0; s < 3; ++s)
      for (size_t m = 0; m < st.intensities.size(); ++m) {
        std::vector<std::string> cells = {CsvWriter::num(dist),
                                          std::to_string(s),
                                          CsvWriter::num(st.intensities[m])};
        for (int e = 0; e < kNumEvents; ++e)
          cells.push_back(CsvWriter::num(st.gamma[s][m][e]));
        cells.push_back(CsvWriter::num(st.cross_click[s][m]));
        csv.row(cells);
      }
  }
  csv.close();
}

void run_decoy(const RunConfig& cfg, double distance_km,
               const std::string& out, int jobs) {
  ProtocolParams p = cfg.protocol;
  p.distance_km = distance_km;
  Statistics st = simulate_statistics(p);
  const KeyRateOptions& ko = cfg.keyrate;
  std::vector<double> qs = cfg.sweep_q_values();

  struct Cell {
    double q;
    int block, signal, event;
    Interval iv;
    bool ok;
  };
  struct Task {
    double q;
    int block, signal;
    Mat sigma;
  };
  std::vector<Task> tasks;
  for (double qv : qs) {
    auto blocks = approx_eigendecomposition(model_state(p.mu_signal, qv, ko.d),
                                            ko.d, model_budget(p.mu_signal, qv, ko.d),
                                            ko.n_blocks);
    for (const auto& blk : blocks) {
      if (!blk.usable) continue;
      Mat sigma = (blk.vector * blk.vector.transpose()).cast<cplx>();
      for (int s = 0; s < 3; ++s)
        tasks.push_back({qv, blk.index, s, sigma});
    }
  }
  std::vector<std::vector<Cell>> results(tasks.size());
  int workers = std::max(1, jobs);
  std::vector<std::unique_ptr<SolverSession>> sessions;
  std::vector<std::mutex> session_locks(workers);
  for (int t = 0; t < workers; ++t)
    sessions.push_back(std::make_unique<SolverSession>());
  std::atomic<int> rr{0};
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int i) {
    int slot = rr.fetch_add(1) % workers;
    std::lock_guard<std::mutex> lock(session_locks[slot]);
    SolverSession& session = *sessions[slot];
    const Task& t = tasks[i];
    DecoyInstance inst =
        make_decoy_instance(p, st, t.q, t.signal, ko.d, ko.n_max);
    for (int e = 0; e < kNumEvents; ++e) {
      bool ok = true;
      Interval iv = yield_bounds(inst, t.sigma, inst.povms[e], session, &ok);
      results[i].push_back({t.q, t.block, t.signal, e, iv, ok});
    }
  });

  CsvWriter csv(out, cfg.hash);
  csv.header({"q", "block", "signal", "event", "yield_lo", "yield_hi",
              "certified"});
  for (const auto& cells : results)
    for (const auto& c : cells)
      csv.row({CsvWriter::num(c.q), std::to_string(c.block),
               std::to_string(c.signal), event_name(c.event),
               CsvWriter::num(c.iv.lo), CsvWriter::num(c.iv.hi),
               c.ok ? "1" : "0"});
  csv.close();
}

std::vector<KeyRatePoint> sweep_points(const RunConfig& cfg,
                                       const std::vector<double>& qs,
                                       const std::vector<double>& distances,
                                       int jobs) {
  struct Job {
    double q, dist;
  };
  std::vector<Job> grid;
  for (double qv : qs)
    for (double dist : distances) grid.push_back({qv, dist});
  std::vector<KeyRatePoint> points(grid.size());
  int workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  std::vector<std::unique_ptr<SolverSession>> sessions;
  std::vector<std::mutex> session_locks(workers);
  for (int t = 0; t < workers; ++t)
    sessions.push_back(std::make_unique<SolverSession>());
  std::atomic<int> rr{0};
  parallel_for(static_cast<int>(grid.size()), jobs, [&](int i) {
    int slot = rr.fetch_add(1) % workers;
    std::lock_guard<std::mutex> lock(session_locks[slot]);
    ProtocolParams p = cfg.protocol;
    p.distance_km = grid[i].dist;
    points[i] = total_keyrate(p, grid[i].q, cfg.keyrate, *sessions[slot]);
  });
  return points;
}

namespace {

void write_keyrate_csv(const RunConfig& cfg,
                       const std::vector<KeyRatePoint>& points,
                       const std::string& out) {
  CsvWriter csv(out, cfg.hash);
  std::vector<std::string> cols = {"q",        "distance_km", "rate",
                                   "raw_rate", "delta_leak",  "eps_proj"};
  int n_blocks = cfg.keyrate.n_blocks;
  for (int b = 0; b < n_blocks; ++b) {
    std::string i = std::to_string(b);
    cols.push_back("weight_" + i);
    cols.push_back("eps_vec_" + i);
    cols.push_back("entropy_" + i);
  }
  size_t n_int = points.empty() ? 0 : points[0].intensities.size();
  for (size_t m = 0; m < n_int; ++m)
    cols.push_back("w_n_mu_" + std::to_string(m));
  cols.push_back("max_sdp_gap");
  cols.push_back("sdp_count");
  cols.push_back("solver_clean");
  csv.header(cols);
  for (const auto& pt : points) {
    std::vector<std::string> cells = {
        CsvWriter::num(pt.q),        CsvWriter::num(pt.distance_km),
        CsvWriter::num(pt.rate),     CsvWriter::num(pt.raw_rate),
        CsvWriter::num(pt.leak),     CsvWriter::num(pt.eps_proj)};
    for (int b = 0; b < n_blocks; ++b) {
      if (b < static_cast<int>(pt.blocks.size())) {
        cells.push_back(CsvWriter::num(pt.blocks[b].weight));
        cells.push_back(CsvWriter::num(pt.blocks[b].eps_vec));
        cells.push_back(CsvWriter::num(pt.blocks[b].entropy_bound));
      } else {
        cells.insert(cells.end(), {"0", "0", "0"});
      }
    }
    for (size_t m = 0; m < n_int; ++m)
      cells.push_back(CsvWriter::num(m < pt.w_n.size() ? pt.w_n[m] : 0.0));
    cells.push_back(CsvWriter::num(pt.max_sdp_gap));
    cells.push_back(std::to_string(pt.sdp_count));
    cells.push_back(pt.solver_clean ? "1" : "0");
    csv.row(cells);
  }
  csv.close();
}

}  // namespace

void run_keyrate(const RunConfig& cfg, double distance_km,
                 const std::string& out, int jobs) {
  auto points = sweep_points(cfg, cfg.sweep_q_values(), {distance_km}, jobs);
  write_keyrate_csv(cfg, points, out);
}

void run_sweep(const RunConfig& cfg, const std::string& out, int jobs) {
  auto points =
      sweep_points(cfg, cfg.sweep_q_values(), cfg.sweep_distances_km, jobs);
  write_keyrate_csv(cfg, points, out);
}

}  // namespace qkd
