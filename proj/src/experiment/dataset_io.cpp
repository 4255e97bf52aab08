#include "legged/experiment/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "legged/error.hpp"

namespace legged {

namespace {

// %.17g round-trips every double exactly.
void put(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, " %.17g", v);
  line += buf;
}

void put_rotation(std::string& line, const Rotation& r) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) put(line, r.matrix()(i, j));
}

void put_vec(std::string& line, const Vec3& v) {
  for (int i = 0; i < 3; ++i) put(line, v(i));
}

class Fields {
 public:
  Fields(const std::vector<std::string>& tok, std::size_t line) : tok_(tok), line_(line) {}

  double number() {
    if (next_ >= tok_.size()) throw ParseError(line_, "record " + tok_[0] + " is too short");
    const std::string& s = tok_[next_++];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(line_, "bad number '" + s + "'");
    }
    return v;
  }
  int index() {
    const double v = number();
    if (v < 0 || v != static_cast<int>(v)) throw ParseError(line_, "expected a non-negative integer");
    return static_cast<int>(v);
  }
  Vec3 vec() {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v(i) = number();
    return v;
  }
  Rotation rotation() {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = number();
    Rotation r(m);
    if (!r.is_valid(1e-6)) throw ParseError(line_, "rotation is not orthonormal");
    return r;
  }
  std::size_t remaining() const { return tok_.size() - next_; }
  void finish() const {
    if (next_ != tok_.size()) throw ParseError(line_, "record " + tok_[0] + " has trailing fields");
  }

 private:
  const std::vector<std::string>& tok_;
  std::size_t line_;
  std::size_t next_ = 1;
};

}  // namespace

void write_dataset(std::ostream& out, const Dataset& d) {
  std::string line;
  auto flush = [&] {
    line += '\n';
    out << line;
    line.clear();
  };
  for (const ImuSample& s : d.imu) {
    line = "IMU";
    put(line, s.timestamp);
    put_vec(line, s.accel);
    put_vec(line, s.gyro);
    flush();
  }
  for (std::size_t f = 0; f < d.encoders.size(); ++f) {
    for (const EncoderReading& e : d.encoders[f]) {
      line = "ENC";
      put(line, e.timestamp);
      line += ' ' + std::to_string(f);
      for (Eigen::Index k = 0; k < e.angles.size(); ++k) put(line, e.angles(k));
      flush();
    }
  }
  for (const ContactEvent& c : d.contacts) {
    line = "CNT";
    put(line, c.timestamp);
    line += ' ' + std::to_string(c.foot) + (c.in_contact ? " 1" : " 0");
    flush();
  }
  for (const RelativePoseRecord& lc : d.loop_closures) {
    line = "LC";
    put(line, lc.t_i);
    put(line, lc.t_j);
    put_rotation(line, lc.measured.rotation);
    put_vec(line, lc.measured.translation);
    for (int i = 0; i < 6; ++i)
      for (int j = i; j < 6; ++j) put(line, lc.covariance(i, j));
    flush();
  }
  for (const TruthState& t : d.truth) {
    line = "TRU";
    put(line, t.timestamp);
    put_rotation(line, t.R);
    put_vec(line, t.p);
    put_vec(line, t.v);
    flush();
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  write_dataset(out, dataset);
}

Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::map<int, std::vector<EncoderReading>> encoders;
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string> tok;
  // Last timestamp seen per stream: imu, contacts, truth, then one per foot.
  std::map<std::string, double> last;
  auto in_order = [&](const std::string& stream, double t) {
    const auto it = last.find(stream);
    if (it != last.end() && t < it->second) throw ParseError(line_no, stream + " records are not time-sorted");
    last[stream] = t;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    tok.clear();
    std::istringstream ss(raw);
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    Fields f(tok, line_no);
    const std::string& tag = tok[0];
    if (tag == "IMU") {
      ImuSample s;
      s.timestamp = f.number();
      s.accel = f.vec();
      s.gyro = f.vec();
      f.finish();
      in_order("IMU", s.timestamp);
      d.imu.push_back(s);
    } else if (tag == "ENC") {
      EncoderReading e;
      e.timestamp = f.number();
      const int foot = f.index();
      if (foot >= 2) throw ParseError(line_no, "foot index out of range");
      e.angles.resize(static_cast<Eigen::Index>(f.remaining()));
      for (Eigen::Index k = 0; k < e.angles.size(); ++k) e.angles(k) = f.number();
      if (e.angles.size() == 0) throw ParseError(line_no, "encoder record without angles");
      auto& stream = encoders[foot];
      if (!stream.empty() && stream.front().angles.size() != e.angles.size()) {
        throw ParseError(line_no, "encoder count changed within a stream");
      }
      in_order("ENC " + std::to_string(foot), e.timestamp);
      stream.push_back(std::move(e));
    } else if (tag == "CNT") {
      ContactEvent c;
      c.timestamp = f.number();
      c.foot = f.index();
      const int state = f.index();
      if (state > 1 || c.foot >= 2) throw ParseError(line_no, "bad contact record");
      c.in_contact = state == 1;
      f.finish();
      in_order("CNT", c.timestamp);
      d.contacts.push_back(c);
    } else if (tag == "LC") {
      RelativePoseRecord lc;
      lc.t_i = f.number();
      lc.t_j = f.number();
      lc.measured.rotation = f.rotation();
      lc.measured.translation = f.vec();
      for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) lc.covariance(i, j) = lc.covariance(j, i) = f.number();
      f.finish();
      d.loop_closures.push_back(lc);
    } else if (tag == "TRU") {
      TruthState t;
      t.timestamp = f.number();
      t.R = f.rotation();
      t.p = f.vec();
      t.v = f.vec();
      f.finish();
      in_order("TRU", t.timestamp);
      d.truth.push_back(t);
    } else {
      throw ParseError(line_no, "unknown record tag '" + tag + "'");
    }
  }

  if (!encoders.empty()) {
    const int feet = encoders.rbegin()->first + 1;
    d.encoders.resize(static_cast<std::size_t>(feet));
    for (auto& [foot, stream] : encoders) d.encoders[static_cast<std::size_t>(foot)] = std::move(stream);
  }

  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

}  // namespace legged
