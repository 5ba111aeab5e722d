#pragma once

// Shared builders and random generators for the unit tests.

#include "sleec/model.hpp"

#include <random>
#include <string>
#include <vector>

namespace sleec::testing {

inline State st(std::set<std::string> events, Seconds time, std::map<std::string, Value> val = {}) {
  return State{std::move(events), std::move(val), time};
}

inline Obligation ob(std::string e, Seconds d, Polarity pol = Polarity::positive) {
  return Obligation{pol, std::move(e), Term::constant(d)};
}

inline CondObligation cob(std::string e, Seconds d, Polarity pol = Polarity::positive,
                          Proposition guard = Proposition::truth()) {
  return CondObligation{std::move(guard), ob(std::move(e), d, pol)};
}

inline NormRule rule(std::string id, std::string trigger, std::vector<CondObligation> items,
                     Proposition cond = Proposition::truth()) {
  NormRule r;
  r.id = std::move(id);
  r.trigger_event = std::move(trigger);
  r.trigger_cond = std::move(cond);
  r.chain.items = std::move(items);
  return r;
}

/// Random traces over the given events and boolean measures, strictly increasing times.
class TraceGen {
public:
  TraceGen(std::vector<std::string> events, std::vector<std::string> bool_measures, unsigned seed = 7)
      : events_(std::move(events)), measures_(std::move(bool_measures)), rng_(seed) {}

  Trace operator()(std::size_t max_len = 5, Seconds max_gap = 4) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<Seconds> gap(1, max_gap);
    std::bernoulli_distribution coin(0.4);
    std::vector<State> states;
    Seconds t = std::uniform_int_distribution<Seconds>(0, max_gap)(rng_);
    const std::size_t n = len(rng_);
    for (std::size_t i = 0; i < n; ++i) {
      State s;
      s.time = t;
      for (const auto& e : events_)
        if (coin(rng_)) s.events.insert(e);
      for (const auto& m : measures_) s.valuation[m] = coin(rng_) ? 1 : 0;
      states.push_back(std::move(s));
      t += gap(rng_);
    }
    return Trace(std::move(states));
  }

  std::mt19937& rng() { return rng_; }

private:
  std::vector<std::string> events_;
  std::vector<std::string> measures_;
  std::mt19937 rng_;
};

}  // namespace sleec::testing

#include <fstream>
#include <sstream>

namespace sleec::testing {

inline std::string read_sample(const std::string& rel) {
  std::ifstream in(std::string(SLEEC_SOURCE_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Fact exists(std::string id, std::string event, Proposition cond = Proposition::truth()) {
  Fact f;
  f.id = std::move(id);
  f.trigger_event = std::move(event);
  f.trigger_cond = std::move(cond);
  return f;
}

}  // namespace sleec::testing
