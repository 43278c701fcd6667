#include "asep/clocks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "asep/error.hpp"
#include "asep/random.hpp"

namespace asep {

JumpRates make_rates(double R, double L) {
  if (!(L >= 0.0) || !(R > L) || std::abs(R - L - 1.0) > 1e-12)
    throw Error(ErrorCode::RateConstraintViolated,
                "need R > L >= 0 and R - L = 1, got R=" + std::to_string(R) +
                    " L=" + std::to_string(L));
  return JumpRates{R, L};
}

std::uint64_t arrow_stream_key(std::uint64_t seed, Site site, Direction d) {
  auto s = static_cast<std::uint64_t>(static_cast<std::int64_t>(site));
  return hash_combine(hash_combine(seed, s), static_cast<std::uint64_t>(d) + 0x11);
}

namespace {

struct PendingStream {
  double next;
  double rate;
  Stream rng;
  Site site;
  Direction dir;
};

// Times inside a slab are close to uniform, so a bucket pass followed by an
// insertion sort is linear on average.
void bucket_sort(ArrowEvent* ev, std::size_t n, double t0, double t1) {
  if (n < 2) return;
  thread_local std::vector<ArrowEvent> tmp;
  thread_local std::vector<std::uint32_t> count;
  tmp.assign(ev, ev + n);
  count.assign(n + 1, 0);
  double scale = double(n) / (t1 - t0);
  auto bucket = [&](double t) {
    auto b = static_cast<std::size_t>((t - t0) * scale);
    return b < n ? b : n - 1;
  };
  for (std::size_t i = 0; i < n; ++i) ++count[bucket(tmp[i].time) + 1];
  for (std::size_t b = 0; b < n; ++b) count[b + 1] += count[b];
  for (std::size_t i = 0; i < n; ++i) ev[count[bucket(tmp[i].time)]++] = tmp[i];
  for (std::size_t i = 1; i < n; ++i) {
    ArrowEvent x = ev[i];
    std::size_t j = i;
    while (j > 0 && event_before(x, ev[j - 1])) {
      ev[j] = ev[j - 1];
      --j;
    }
    ev[j] = x;
  }
}

// Events are produced slab by slab in time; each slab is sorted on its own,
// which gives the same list as sorting everything at once.
void generate(std::vector<ArrowEvent>& out, const JumpRates& rates, SiteInterval sites,
              double horizon, std::uint64_t seed) {
  out.clear();
  if (sites.empty() || !(horizon > 0)) return;
  thread_local std::vector<PendingStream> streams;
  streams.clear();
  for (Site s = sites.lo; s <= sites.hi; ++s) {
    for (Direction d : {Direction::Left, Direction::Right}) {
      double rate = d == Direction::Left ? rates.L : rates.R;
      if (rate <= 0) continue;
      PendingStream p{0.0, rate, Stream(arrow_stream_key(seed, s, d)), s, d};
      p.next = p.rng.exponential(rate);
      if (p.next < horizon) streams.push_back(p);
    }
  }
  double expected = double(sites.size()) * rates.total() * horizon;
  out.reserve(static_cast<std::size_t>(expected + 6 * std::sqrt(expected) + 16));
  int nslab = std::max(1, static_cast<int>(expected / 32768.0));
  double width = horizon / nslab;
  std::size_t active = streams.size();
  for (int k = 0; k < nslab && active > 0; ++k) {
    double t1 = k + 1 == nslab ? horizon : width * (k + 1);
    std::size_t start = out.size();
    for (std::size_t i = 0; i < active;) {
      PendingStream& p = streams[i];
      while (p.next < t1) {
        out.push_back(ArrowEvent{p.next, p.site, p.dir});
        p.next += p.rng.exponential(p.rate);
      }
      if (p.next >= horizon) {
        streams[i] = streams[--active];
      } else {
        ++i;
      }
    }
    bucket_sort(out.data() + start, out.size() - start, width * k, t1);
  }
}

}  // namespace

ClockWindow sample_clock_window(const JumpRates& rates, SiteInterval sites, double horizon,
                                std::uint64_t seed) {
  ClockWindow w;
  resample_clock_window(w, rates, sites, horizon, seed);
  return w;
}

void resample_clock_window(ClockWindow& w, const JumpRates& rates, SiteInterval sites,
                           double horizon, std::uint64_t seed) {
  if (!(horizon > 0)) throw Error(ErrorCode::InvalidSpec, "clock horizon must be positive");
  if (sites.empty()) throw Error(ErrorCode::InvalidSpec, "clock window is empty");
  w.sites_ = sites;
  w.horizon_ = horizon;
  w.seed_ = seed;
  w.rates_ = rates;
  generate(w.events_, rates, sites, horizon, seed);
}

std::span<const ArrowEvent> events_in_order(const ClockWindow& w) {
  return std::span<const ArrowEvent>(w.events());
}

ClockWindow merge_clock_windows(const ClockWindow& a, const ClockWindow& b) {
  const ClockWindow& lo = a.sites().lo <= b.sites().lo ? a : b;
  const ClockWindow& hi = &lo == &a ? b : a;
  if (lo.seed() != hi.seed() || !(lo.rates() == hi.rates()) || lo.horizon() != hi.horizon() ||
      lo.sites().hi + 1 != hi.sites().lo)
    throw Error(ErrorCode::WindowMismatch, "clock windows are not adjacent pieces of one field");
  ClockWindow m;
  m.sites_ = SiteInterval{lo.sites().lo, hi.sites().hi};
  m.horizon_ = lo.horizon();
  m.seed_ = lo.seed();
  m.rates_ = lo.rates();
  m.events_.resize(lo.size() + hi.size());
  std::merge(lo.events().begin(), lo.events().end(), hi.events().begin(), hi.events().end(),
             m.events_.begin(), event_before);
  return m;
}

namespace {
constexpr char kMagic[8] = {'A', 'S', 'E', 'P', 'C', 'L', 'K', '1'};

template <class T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  // little endian on disk
  for (std::size_t i = 0; i < sizeof(T); ++i) os.put(static_cast<char>(buf[i]));
}

template <class T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    int c = is.get();
    if (c == EOF) throw Error(ErrorCode::Io, "truncated clock file");
    buf[i] = static_cast<unsigned char>(c);
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}
}  // namespace

void write_clock_window(std::ostream& os, const ClockWindow& w) {
  os.write(kMagic, 8);
  put<std::int32_t>(os, w.sites().lo);
  put<std::int32_t>(os, w.sites().hi);
  put<double>(os, w.horizon());
  put<std::uint64_t>(os, w.seed());
  put<double>(os, w.rates().R);
  put<double>(os, w.rates().L);
}

ClockWindow read_clock_window(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorCode::Io, "not a clock file");
  SiteInterval s;
  s.lo = get<std::int32_t>(is);
  s.hi = get<std::int32_t>(is);
  double horizon = get<double>(is);
  auto seed = get<std::uint64_t>(is);
  double R = get<double>(is);
  double L = get<double>(is);
  return sample_clock_window(JumpRates{R, L}, s, horizon, seed);
}

}  // namespace asep
