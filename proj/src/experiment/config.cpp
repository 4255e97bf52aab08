#include "legged/experiment/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "legged/error.hpp"

namespace legged {

std::string_view to_string(RunPreset preset) {
  switch (preset) {
    case RunPreset::ImuOnly: return "imu_only";
    case RunPreset::ImuLc: return "imu_lc";
    case RunPreset::ImuContactFk: return "imu_contact_fk";
    case RunPreset::All: return "all";
  }
  return "unknown";
}

RunPreset parse_preset(std::string_view name) {
  for (RunPreset p : {RunPreset::ImuOnly, RunPreset::ImuLc, RunPreset::ImuContactFk, RunPreset::All}) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "expected a number, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

LinkParam parse_link(const std::string& value, std::size_t line) {
  const auto tok = tokens(value);
  if (tok.size() != 13 && tok.size() != 7) {
    throw ParseError(line, "link needs 13 or 7 fields, got " + std::to_string(tok.size()));
  }
  LinkParam link;
  std::size_t k = 0;
  if (tok.size() == 13) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = to_double(tok[k++], line);
    link.rotation = Rotation(m);
    if (!link.rotation.is_valid(1e-9)) throw ParseError(line, "link rotation is not orthonormal");
  } else {
    Vec3 phi;
    for (int i = 0; i < 3; ++i) phi(i) = to_double(tok[k++], line);
    link.rotation = exp_so3(phi);
  }
  for (int i = 0; i < 3; ++i) link.translation(i) = to_double(tok[k++], line);
  const std::string& axis = tok[k];
  if (axis == "x") link.axis = JointAxis::X;
  else if (axis == "y") link.axis = JointAxis::Y;
  else if (axis == "z") link.axis = JointAxis::Z;
  else if (axis != "-") throw ParseError(line, "axis must be x, y, z or -");
  return link;
}

using Setter = std::function<void(const std::string&, std::size_t)>;

Setter number(double& target) {
  return [&target](const std::string& v, std::size_t line) { target = to_double(v, line); };
}

Setter integer(int& target) {
  return [&target](const std::string& v, std::size_t line) {
    const double d = to_double(v, line);
    if (d != static_cast<int>(d)) throw ParseError(line, "expected an integer");
    target = static_cast<int>(d);
  };
}

std::map<std::string, Setter> make_setters(HarnessConfig& c) {
  SimConfig& s = c.sim;
  EstimatorConfig& e = c.estimator;
  NoiseConfig& n = c.estimator.noise;
  std::map<std::string, Setter> m;
  m["sim.duration"] = number(s.duration);
  m["sim.imu_rate"] = number(s.imu_rate);
  m["sim.lc_stride"] = integer(s.lc_stride);
  m["sim.seed"] = [&s](const std::string& v, std::size_t line) {
    const double d = to_double(v, line);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      throw ParseError(line, "seed must be a non-negative integer");
    }
    s.seed = static_cast<std::uint64_t>(d);
  };
  m["sim.speed"] = number(s.path.speed);
  m["sim.curvature"] = number(s.path.curvature);
  m["sim.height"] = number(s.path.height);
  m["sim.bob"] = number(s.path.bob_amplitude);
  m["sim.sway"] = number(s.path.sway_amplitude);
  m["sim.yaw"] = number(s.path.yaw_amplitude);
  m["sim.pitch"] = number(s.path.pitch_amplitude);
  m["sim.roll"] = number(s.path.roll_amplitude);
  m["sim.step_period"] = number(s.gait.step_period);
  m["sim.double_support"] = number(s.gait.double_support);
  m["sim.stance_width"] = number(s.gait.stance_width);

  m["noise.accel"] = number(n.accel);
  m["noise.gyro"] = number(n.gyro);
  m["noise.accel_bias"] = number(n.accel_bias);
  m["noise.gyro_bias"] = number(n.gyro_bias);
  m["noise.lc_translation"] = number(n.lc_translation);
  m["noise.lc_rotation"] = number(n.lc_rotation);
  m["noise.contact_velocity"] = number(n.contact_velocity);
  m["noise.contact_angular"] = number(n.contact_angular);
  m["noise.encoder"] = number(n.encoder);
  m["noise.accel_bias_initial"] = number(n.accel_bias_initial);
  m["noise.gyro_bias_initial"] = number(n.gyro_bias_initial);

  m["prior.rotation"] = number(e.prior.rotation);
  m["prior.position"] = number(e.prior.position);
  m["prior.velocity"] = number(e.prior.velocity);
  m["prior.gyro_bias"] = number(e.prior.gyro_bias);
  m["prior.accel_bias"] = number(e.prior.accel_bias);

  LmConfig& lm = e.solver;
  m["solver.lambda_initial"] = number(lm.lambda_initial);
  m["solver.lambda_up"] = number(lm.lambda_up);
  m["solver.lambda_down"] = number(lm.lambda_down);
  m["solver.lambda_max"] = number(lm.lambda_max);
  m["solver.relative_cost_tolerance"] = number(lm.relative_cost_tolerance);
  m["solver.gradient_tolerance"] = number(lm.gradient_tolerance);
  m["solver.max_iterations"] = integer(lm.max_iterations);
  m["solver.jacobian"] = [&lm](const std::string& v, std::size_t line) {
    if (v == "analytic") lm.jacobian_mode = JacobianMode::Analytic;
    else if (v == "numeric") lm.jacobian_mode = JacobianMode::Numeric;
    else throw ParseError(line, "jacobian must be analytic or numeric");
  };
  m["solver.execution"] = [&lm](const std::string& v, std::size_t line) {
    if (v == "parallel") lm.execution = Execution::Parallel;
    else if (v == "serial") lm.execution = Execution::Serial;
    else throw ParseError(line, "execution must be parallel or serial");
  };

  m["run.preset"] = [&e](const std::string& v, std::size_t line) {
    try {
      e.preset = parse_preset(v);
    } catch (const Error& err) {
      throw ParseError(line, err.what());
    }
  };
  m["run.contact_kind"] = [&e](const std::string& v, std::size_t line) {
    if (v == "rigid") e.contact_kind = ContactKind::Rigid;
    else if (v == "point") e.contact_kind = ContactKind::Point;
    else throw ParseError(line, "contact_kind must be rigid or point");
  };
  m["run.fk_covariance_floor"] = number(e.fk_covariance_floor);
  return m;
}

}  // namespace

HarnessConfig parse_config(std::istream& in) {
  HarnessConfig cfg;
  auto setters = make_setters(cfg);
  std::string section;
  std::map<int, std::vector<LinkParam>> chain_links;
  int chain_foot = -1;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      chain_foot = -1;
      if (section.rfind("chain.", 0) == 0) {
        const std::string idx = section.substr(6);
        const double f = to_double(idx, line_no);
        if (f != 0.0 && f != 1.0) throw ParseError(line_no, "chain index must be 0 or 1");
        chain_foot = static_cast<int>(f);
        chain_links[chain_foot].clear();
      } else if (section != "sim" && section != "noise" && section != "prior" &&
                 section != "solver" && section != "run") {
        throw ParseError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ParseError(line_no, "key outside of a section");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + key + "'");

    if (chain_foot >= 0) {
      if (key != "link") throw ParseError(line_no, "chain sections only accept 'link'");
      chain_links[chain_foot].push_back(parse_link(value, line_no));
      continue;
    }
    const auto it = setters.find(section + "." + key);
    if (it == setters.end()) throw ParseError(line_no, "unknown key '" + key + "' in [" + section + "]");
    it->second(value, line_no);
  }

  for (auto& [foot, links] : chain_links) {
    try {
      cfg.sim.chains[static_cast<std::size_t>(foot)] = KinematicChain(links);
    } catch (const Error& e) {
      throw ParseError(line_no, std::string("chain.") + std::to_string(foot) + ": " + e.what());
    }
  }
  cfg.sim.noise = cfg.estimator.noise;
  cfg.estimator.chains = cfg.sim.chains;
  try {
    cfg.sim.validate();
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  return cfg;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const HarnessConfig& c) {
  std::ostringstream o;
  o.precision(17);
  const SimConfig& s = c.sim;
  const NoiseConfig& n = c.estimator.noise;
  const EstimatorConfig& e = c.estimator;
  o << "[sim]\n"
    << "duration = " << s.duration << "\nimu_rate = " << s.imu_rate << "\nseed = " << s.seed
    << "\nlc_stride = " << s.lc_stride << "\nspeed = " << s.path.speed
    << "\ncurvature = " << s.path.curvature << "\nheight = " << s.path.height
    << "\nbob = " << s.path.bob_amplitude << "\nsway = " << s.path.sway_amplitude
    << "\nyaw = " << s.path.yaw_amplitude << "\npitch = " << s.path.pitch_amplitude
    << "\nroll = " << s.path.roll_amplitude << "\nstep_period = " << s.gait.step_period
    << "\ndouble_support = " << s.gait.double_support
    << "\nstance_width = " << s.gait.stance_width << "\n\n";
  o << "[noise]\n"
    << "accel = " << n.accel << "\ngyro = " << n.gyro << "\naccel_bias = " << n.accel_bias
    << "\ngyro_bias = " << n.gyro_bias << "\nlc_translation = " << n.lc_translation
    << "\nlc_rotation = " << n.lc_rotation << "\ncontact_velocity = " << n.contact_velocity
    << "\ncontact_angular = " << n.contact_angular << "\nencoder = " << n.encoder
    << "\naccel_bias_initial = " << n.accel_bias_initial
    << "\ngyro_bias_initial = " << n.gyro_bias_initial << "\n\n";
  o << "[prior]\n"
    << "rotation = " << e.prior.rotation << "\nposition = " << e.prior.position
    << "\nvelocity = " << e.prior.velocity << "\ngyro_bias = " << e.prior.gyro_bias
    << "\naccel_bias = " << e.prior.accel_bias << "\n\n";
  const LmConfig& lm = e.solver;
  o << "[solver]\n"
    << "lambda_initial = " << lm.lambda_initial << "\nlambda_up = " << lm.lambda_up
    << "\nlambda_down = " << lm.lambda_down << "\nlambda_max = " << lm.lambda_max
    << "\nrelative_cost_tolerance = " << lm.relative_cost_tolerance
    << "\ngradient_tolerance = " << lm.gradient_tolerance
    << "\nmax_iterations = " << lm.max_iterations
    << "\njacobian = " << (lm.jacobian_mode == JacobianMode::Analytic ? "analytic" : "numeric")
    << "\nexecution = " << (lm.execution == Execution::Parallel ? "parallel" : "serial") << "\n\n";
  o << "[run]\n"
    << "preset = " << to_string(e.preset)
    << "\ncontact_kind = " << (e.contact_kind == ContactKind::Rigid ? "rigid" : "point")
    << "\nfk_covariance_floor = " << e.fk_covariance_floor << "\n";
  for (std::size_t f = 0; f < s.chains.size(); ++f) {
    o << "\n[chain." << f << "]\n";
    const KinematicChain& chain = s.chains[f];
    for (std::size_t k = 1; k <= chain.link_count(); ++k) {
      const LinkParam& l = chain.link(k);
      o << "link =";
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) o << ' ' << l.rotation.matrix()(r, col);
      o << ' ' << l.translation.x() << ' ' << l.translation.y() << ' ' << l.translation.z() << ' ';
      if (!l.axis) o << '-';
      else o << "xyz"[static_cast<int>(*l.axis)];
      o << '\n';
    }
  }
  out << o.str();
}

}  // namespace legged
