#include "cosil/replay/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cosil/autodiff/params.hpp"
#include "cosil/errors.hpp"

namespace cosil::replay {
namespace {

constexpr char kMagic[8] = {'C', 'O', 'S', 'I', 'L', 'R', 'B', '\0'};
constexpr std::uint64_t kVersion = 1;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void copy_row(const std::vector<double>& src, std::size_t index, std::size_t width, ad::Tensor& dst, std::size_t row) {
  std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(index * width), width, dst.data() + row * width);
}

}  // namespace

Dims Dims::of(const env::Environment& env) {
  const auto space = env.action_space();
  return {env.observation_dim(), env.state_dim(), space.storage_width(), space.encoding_width()};
}

EpisodeBuilder::EpisodeBuilder(const env::ActionSpace& space, Dims dims) : space_(space), dims_(dims) {}

void EpisodeBuilder::begin(const env::StepResult& initial) {
  record_ = EpisodeRecord{};
  state_ = initial.privileged_state;
  obs_ = initial.observation;
  prev_.assign(dims_.action_encoding, 0.0);
}

void EpisodeBuilder::add(std::span<const double> action, const env::StepResult& next) {
  auto append = [](std::vector<double>& dst, std::span<const double> src) { dst.insert(dst.end(), src.begin(), src.end()); };
  append(record_.states, state_);
  append(record_.observations, obs_);
  append(record_.prev_actions, prev_);
  append(record_.actions, action);
  record_.rewards.push_back(next.reward);
  const bool terminal = next.done && !next.truncated;
  record_.dones.push_back(terminal ? 1 : 0);
  record_.terminal = terminal;
  state_ = next.privileged_state;
  obs_ = next.observation;
  space_.encode(action, prev_);
}

EpisodeRecord EpisodeBuilder::finish() {
  if (record_.length() == 0) throw UsageError("finish() on an empty episode");
  record_.final_state = state_;
  record_.final_observation = obs_;
  EpisodeRecord out = std::move(record_);
  record_ = EpisodeRecord{};
  return out;
}

double PaddedBatch::valid_steps() const {
  double n = 0;
  for (double m : mask.values()) n += m;
  return n;
}

ReplayBuffer::ReplayBuffer(env::ActionSpace space, Dims dims, std::size_t capacity)
    : space_(std::move(space)), dims_(dims), capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  if (dims_.obs == 0 || dims_.state == 0 || dims_.action != space_.storage_width() ||
      dims_.action_encoding != space_.encoding_width()) {
    throw ConfigError("replay dims do not match the action space");
  }
}

void ReplayBuffer::validate(const EpisodeRecord& r) const {
  const std::size_t L = r.length();
  auto fail = [](const std::string& why) { throw ValidationError("malformed episode: " + why); };
  if (L == 0) fail("empty");
  if (L > capacity_) fail("longer than the buffer capacity");
  if (r.states.size() != L * dims_.state) fail("state sequence length");
  if (r.observations.size() != L * dims_.obs) fail("observation sequence length");
  if (r.prev_actions.size() != L * dims_.action_encoding) fail("prev_action sequence length");
  if (r.actions.size() != L * dims_.action) fail("action sequence length");
  if (r.dones.size() != L) fail("done sequence length");
  if (r.final_state.size() != dims_.state) fail("final state width");
  if (r.final_observation.size() != dims_.obs) fail("final observation width");
  for (std::size_t t = 0; t + 1 < L; ++t) {
    if (r.dones[t] != 0) fail("done before the final step");
  }
  if ((r.dones[L - 1] != 0) != r.terminal) fail("final done flag disagrees with terminal");
  for (std::size_t t = 0; t < L; ++t) {
    if (!space_.contains(std::span(r.actions).subspan(t * dims_.action, dims_.action))) fail("action outside the space");
  }
  for (std::size_t k = 0; k < dims_.action_encoding; ++k) {
    if (r.prev_actions[k] != 0.0) fail("first prev_action must be zero");
  }
  if (!all_finite(r.states) || !all_finite(r.observations) || !all_finite(r.rewards) || !all_finite(r.prev_actions) ||
      !all_finite(r.final_state) || !all_finite(r.final_observation)) {
    fail("non-finite value");
  }
}

void ReplayBuffer::push(EpisodeRecord record) {
  validate(record);
  const std::size_t L = record.length();
  episodes_.push_back(std::move(record));
  stored_ += L;
  total_pushed_ += L;
  while (stored_ > capacity_) {
    stored_ -= episodes_.front().length();
    episodes_.pop_front();
  }
}

std::optional<PaddedBatch> ReplayBuffer::sample(std::size_t batch, std::size_t max_len, std::mt19937_64& rng) const {
  if (episodes_.empty()) return std::nullopt;
  if (batch == 0 || max_len == 0) throw ConfigError("batch size and max_len must be positive");
  std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
  std::vector<std::size_t> idx(batch), start(batch), len(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    idx[b] = pick(rng);
    const std::size_t L = episodes_[idx[b]].length();
    len[b] = std::min(L, max_len);
    start[b] = L > max_len ? std::uniform_int_distribution<std::size_t>(0, L - max_len)(rng) : 0;
  }
  return gather(idx, start, len);
}

PaddedBatch ReplayBuffer::gather(const std::vector<std::size_t>& episodes, const std::vector<std::size_t>& starts,
                                 const std::vector<std::size_t>& lengths) const {
  const std::size_t B = episodes.size();
  if (starts.size() != B || lengths.size() != B || B == 0) throw UsageError("gather: mismatched pick lists");
  std::size_t T = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const EpisodeRecord& e = episodes_.at(episodes[b]);
    if (lengths[b] == 0 || starts[b] + lengths[b] > e.length()) throw UsageError("gather: window outside episode");
    T = std::max(T, lengths[b]);
  }

  PaddedBatch out;
  out.batch = B;
  out.steps = T;
  out.observations = ad::Tensor({(T + 1) * B, dims_.obs});
  out.states = ad::Tensor({(T + 1) * B, dims_.state});
  out.prev_actions = ad::Tensor({(T + 1) * B, dims_.action_encoding});
  out.actions = ad::Tensor({T * B, dims_.action});
  out.rewards = ad::Tensor({T * B, 1});
  out.dones = ad::Tensor({T * B, 1});
  out.mask = ad::Tensor({T * B, 1});
  out.lengths = lengths;
  out.episode_index = episodes;
  out.window_start = starts;

  std::vector<double> encoded(dims_.action_encoding);
  for (std::size_t b = 0; b < B; ++b) {
    const EpisodeRecord& e = episodes_[episodes[b]];
    const std::size_t s0 = starts[b], n = lengths[b];
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = s0 + k, row = out.row(k, b);
      copy_row(e.observations, t, dims_.obs, out.observations, row);
      copy_row(e.states, t, dims_.state, out.states, row);
      copy_row(e.prev_actions, t, dims_.action_encoding, out.prev_actions, row);
      copy_row(e.actions, t, dims_.action, out.actions, row);
      out.rewards[row] = e.rewards[t];
      out.dones[row] = e.dones[t];
      out.mask[row] = 1.0;
    }
    // Successor of the window's last step.
    const std::size_t end = s0 + n, row = out.row(n, b);
    if (end == e.length()) {
      std::copy(e.final_observation.begin(), e.final_observation.end(), out.observations.data() + row * dims_.obs);
      std::copy(e.final_state.begin(), e.final_state.end(), out.states.data() + row * dims_.state);
    } else {
      copy_row(e.observations, end, dims_.obs, out.observations, row);
      copy_row(e.states, end, dims_.state, out.states, row);
    }
    space_.encode(std::span(e.actions).subspan((end - 1) * dims_.action, dims_.action), encoded);
    std::copy(encoded.begin(), encoded.end(), out.prev_actions.data() + row * dims_.action_encoding);
  }
  return out;
}

void ReplayBuffer::save(std::ostream& os) const {
  os.write(kMagic, sizeof kMagic);
  ad::io::write_u64(os, kVersion);
  for (std::size_t d : {dims_.obs, dims_.state, dims_.action, dims_.action_encoding, capacity_}) ad::io::write_u64(os, d);
  ad::io::write_u64(os, total_pushed_);
  ad::io::write_u64(os, episodes_.size());
  for (const EpisodeRecord& e : episodes_) {
    ad::io::write_doubles(os, e.states);
    ad::io::write_doubles(os, e.observations);
    ad::io::write_doubles(os, e.prev_actions);
    ad::io::write_doubles(os, e.actions);
    ad::io::write_doubles(os, e.rewards);
    const std::vector<double> dones(e.dones.begin(), e.dones.end());
    ad::io::write_doubles(os, dones);
    ad::io::write_doubles(os, e.final_state);
    ad::io::write_doubles(os, e.final_observation);
    ad::io::write_u64(os, e.terminal ? 1 : 0);
  }
  if (!os) throw ValidationError("replay snapshot write failed");
}

void ReplayBuffer::load(std::istream& is) {
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ValidationError("not a replay snapshot");
  const auto version = ad::io::read_u64(is);
  if (version != kVersion) throw ValidationError("unsupported replay snapshot version " + std::to_string(version));
  Dims d;
  d.obs = ad::io::read_u64(is);
  d.state = ad::io::read_u64(is);
  d.action = ad::io::read_u64(is);
  d.action_encoding = ad::io::read_u64(is);
  const auto capacity = ad::io::read_u64(is);
  if (!(d == dims_)) throw ValidationError("replay snapshot dims do not match this buffer");
  const auto total = ad::io::read_u64(is);
  const auto n = ad::io::read_u64(is);

  std::deque<EpisodeRecord> loaded;
  std::size_t stored = 0;
  const std::size_t saved_capacity = capacity_;
  capacity_ = capacity;
  for (std::uint64_t i = 0; i < n; ++i) {
    EpisodeRecord e;
    e.states = ad::io::read_doubles(is);
    e.observations = ad::io::read_doubles(is);
    e.prev_actions = ad::io::read_doubles(is);
    e.actions = ad::io::read_doubles(is);
    e.rewards = ad::io::read_doubles(is);
    for (double v : ad::io::read_doubles(is)) e.dones.push_back(v != 0.0 ? 1 : 0);
    e.final_state = ad::io::read_doubles(is);
    e.final_observation = ad::io::read_doubles(is);
    e.terminal = ad::io::read_u64(is) != 0;
    try {
      validate(e);
    } catch (...) {
      capacity_ = saved_capacity;
      throw;
    }
    stored += e.length();
    loaded.push_back(std::move(e));
  }
  if (stored > capacity_) {
    capacity_ = saved_capacity;
    throw ValidationError("replay snapshot exceeds its capacity");
  }
  episodes_ = std::move(loaded);
  stored_ = stored;
  total_pushed_ = total;
}

void ReplayBuffer::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open " + path + " for writing");
  save(os);
}

void ReplayBuffer::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path);
  load(is);
}

}  // namespace cosil::replay
