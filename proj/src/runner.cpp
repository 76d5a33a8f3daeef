#include "auv/runner.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "auv/transport.hpp"

namespace auv {

namespace {

constexpr std::uint64_t kOdomStream = 4;

LogRow make_row(const FrontseatSnapshot& f, const BackseatSnapshot& b) {
  LogRow r;
  r.tick = f.tick;
  r.t = f.t;
  r.truth_pose = f.truth.pose;
  r.truth_twist = f.truth.twist;
  r.dr_pose = f.dr_pose;
  r.dr_cov_h = f.dr_cov_h;
  r.fused_pose = b.fused_pose;
  r.fused_cov_h = b.fused_cov_h;
  r.estimator_valid = b.estimator_valid;
  r.transform = b.alignment.transform;
  r.phase = b.pilot.phase;
  r.waypoint_index = b.pilot.waypoint_index;
  r.safety_hold = b.safety_hold;
  if (const auto* p = std::get_if<Pose>(&b.setpoint.target)) {
    r.setpoint_position = p->position;
    r.setpoint_yaw = yaw_of(p->orientation);
  }
  r.wrench = f.wrench;
  r.thrusts = f.thrust_cmd;
  r.gateway_mode = f.mode;
  r.armed = f.armed;
  r.battery_voltage = f.battery_voltage;
  r.counters = b.counters;
  return r;
}

bool finished(const BackseatSnapshot& b) {
  return b.pilot.phase == PilotPhase::kDone || b.pilot.phase == PilotPhase::kFault;
}

RunMeta make_meta(const LoadedRun& cfg) {
  RunMeta m;
  m.seed = cfg.run.seed;
  m.transport = to_string(cfg.run.transport);
  m.deterministic = cfg.run.transport == Transport::kInProcess;
  m.sim_rate = cfg.run.sim_rate;
  m.telemetry_rate = cfg.run.telemetry_rate;
  m.duration = cfg.run.duration;
  m.vehicle_path = cfg.run.vehicle_path;
  m.mission_path = cfg.run.mission_path;
  m.waypoints = cfg.mission.mission.waypoints;
  return m;
}

struct Sinks {
  std::ostringstream log;
  std::ostringstream events;
  std::map<std::string, std::string> extra;
  std::size_t plans = 0;
  bool dump_tree = false;

  void write_events(const std::vector<LoggedEvent>& ev) {
    for (const auto& e : ev) write_event(events, e);
  }
  void write_plans(std::vector<PlanResult> plans_in) {
    for (auto& p : plans_in) {
      ++plans;
      if (!dump_tree) continue;
      std::ostringstream os;
      write_tree_jsonl(os, p);
      extra["tree_" + std::to_string(plans) + ".jsonl"] = os.str();
    }
  }
};

class OdomFeed {
 public:
  OdomFeed(const LoadedRun& cfg)
      : enabled_(cfg.vehicle.sensors.odom_enabled),
        sched_{period_in_ticks(cfg.vehicle.sensors.odom_rate, cfg.run.sim_rate)},
        model_(cfg.vehicle.sensors.odom),
        rng_(make_rng(cfg.run.seed, kOdomStream)) {}

  std::optional<ExternalOdomReading> poll(std::int64_t tick, const SimState& truth) {
    if (!enabled_ || !sched_.due(tick)) return std::nullopt;
    return model_.sample(truth, rng_);
  }

 private:
  bool enabled_;
  SensorSchedule sched_;
  ExternalOdomModel model_;
  Rng rng_;
};

void run_in_process(const LoadedRun& cfg, Sinks& out) {
  const double sim_rate = cfg.run.sim_rate;
  Frontseat fs(cfg.vehicle, cfg.mission, sim_rate, cfg.run.telemetry_rate, cfg.run.seed);
  Backseat bs(cfg.vehicle, cfg.mission, cfg.run.backseat_control, cfg.run.seed, 1.0 / cfg.run.telemetry_rate);
  auto [front_end, back_end] = make_in_process_pair();
  OdomFeed odom(cfg);
  fs.receive_operator(operator_startup_script());

  const auto last_tick = static_cast<std::int64_t>(std::llround(cfg.run.duration * sim_rate));
  for (std::int64_t k = 0; k <= last_tick; ++k) {
    if (auto r = odom.poll(k, fs.truth())) bs.add_external_odom(*r);
    fs.receive(front_end->receive());
    front_end->send(fs.step());
    bs.receive(back_end->receive());
    back_end->send(bs.process());

    out.write_events(fs.take_events());
    out.write_events(bs.take_events());
    out.write_plans(bs.take_plans());
    if (fs.telemetry_sent()) {
      write_log_row(out.log, make_row(fs.snapshot(), bs.snapshot()));
      if (finished(bs.snapshot())) break;
    }
  }
}

// Real sockets with the backseat on its own thread. After each TELEMETRY the
// frontseat waits (bounded) for the matching backseat tick, which keeps the
// simulation close to lockstep without guaranteeing it.
void run_tcp(const LoadedRun& cfg, Sinks& out) {
  const double sim_rate = cfg.run.sim_rate;
  Frontseat fs(cfg.vehicle, cfg.mission, sim_rate, cfg.run.telemetry_rate, cfg.run.seed);
  OdomFeed odom(cfg);
  fs.receive_operator(operator_startup_script());

  TcpListener listener(cfg.run.tcp_host, cfg.run.tcp_port);
  const int port = listener.port();

  std::mutex mu;
  std::condition_variable cv;
  std::deque<ExternalOdomReading> odom_queue;
  std::map<double, BackseatSnapshot> snapshots;
  BackseatSnapshot latest;
  std::vector<LoggedEvent> bs_events;
  std::vector<PlanResult> bs_plans;
  bool stop = false;
  std::string thread_error;

  std::thread backseat_thread([&] {
    try {
      Backseat bs(cfg.vehicle, cfg.mission, cfg.run.backseat_control, cfg.run.seed,
                  1.0 / cfg.run.telemetry_rate);
      auto link = tcp_connect(cfg.run.tcp_host, port, 5000);
      std::uint64_t seen = 0;
      while (true) {
        {
          std::lock_guard<std::mutex> lock(mu);
          if (stop) break;
        }
        const std::string data = link->receive(50);
        if (link->closed() && data.empty()) break;
        bs.receive(data);
        {
          std::lock_guard<std::mutex> lock(mu);
          while (!odom_queue.empty()) {
            bs.add_external_odom(odom_queue.front());
            odom_queue.pop_front();
          }
        }
        const std::string reply = bs.process();
        if (!reply.empty()) link->send(reply);
        std::lock_guard<std::mutex> lock(mu);
        for (auto& e : bs.take_events()) bs_events.push_back(std::move(e));
        for (auto& p : bs.take_plans()) bs_plans.push_back(std::move(p));
        if (bs.ticks() != seen) {
          seen = bs.ticks();
          latest = bs.snapshot();
          snapshots[latest.t] = latest;
          cv.notify_all();
        }
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      thread_error = e.what();
      cv.notify_all();
    }
  });

  try {
    auto link = listener.accept(5000);
    const auto last_tick = static_cast<std::int64_t>(std::llround(cfg.run.duration * sim_rate));
    for (std::int64_t k = 0; k <= last_tick; ++k) {
      if (auto r = odom.poll(k, fs.truth())) {
        std::lock_guard<std::mutex> lock(mu);
        odom_queue.push_back(*r);
      }
      fs.receive(link->receive(0));
      link->send(fs.step());
      out.write_events(fs.take_events());
      if (!fs.telemetry_sent()) continue;

      const double t = fs.snapshot().t;
      BackseatSnapshot snap;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait_for(lock, std::chrono::seconds(1),
                    [&] { return snapshots.count(t) > 0 || !thread_error.empty(); });
        if (!thread_error.empty()) throw TransportError("backseat: " + thread_error);
        const auto it = snapshots.find(t);
        snap = it != snapshots.end() ? it->second : latest;
        snapshots.erase(snapshots.begin(), snapshots.upper_bound(t));
        out.write_events(bs_events);
        bs_events.clear();
        out.write_plans(std::move(bs_plans));
        bs_plans.clear();
      }
      fs.receive(link->receive(5));
      write_log_row(out.log, make_row(fs.snapshot(), snap));
      if (finished(snap)) break;
    }
    link->close();
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(mu);
      stop = true;
    }
    backseat_thread.join();
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(mu);
    stop = true;
  }
  backseat_thread.join();
}

}  // namespace

std::string operator_startup_script() {
  MessageWriter op(kOperatorSource);
  std::string s = op.write(0.0, Command{1, Arm{}});
  s += op.write(0.0, Command{2, ModeRequest{GatewayMode::kAutonomous}});
  return s;
}

RunArtifacts execute(const LoadedRun& cfg_in) {
  if (auto findings = validate(cfg_in); !findings.empty()) throw ConfigError(std::move(findings));
  const auto wall0 = std::chrono::steady_clock::now();
  LoadedRun cfg = cfg_in;
  cfg.vehicle.pilot.planner.record_tree = cfg.run.dump_tree;

  Sinks sinks;
  sinks.dump_tree = cfg.run.dump_tree;
  write_log_header(sinks.log);
  write_meta_event(sinks.events, make_meta(cfg));
  if (cfg.run.transport == Transport::kTcp) run_tcp(cfg, sinks);
  else run_in_process(cfg, sinks);

  RunArtifacts a;
  a.log_tsv = sinks.log.str();
  a.events_jsonl = sinks.events.str();
  a.extra_files = std::move(sinks.extra);
  // The report is derived from the serialized logs so replay reproduces it.
  std::istringstream log_in(a.log_tsv), ev_in(a.events_jsonl);
  a.rows = read_log(log_in);
  a.report = compute_report(a.rows, read_events(ev_in));
  a.report_json = report_json(a.report);
  a.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return a;
}

void write_artifacts(const RunArtifacts& a, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    os << text;
  };
  put("log.tsv", a.log_tsv);
  put("events.jsonl", a.events_jsonl);
  put("report.json", a.report_json);
  for (const auto& [name, text] : a.extra_files) put(name, text);
}

}  // namespace auv
