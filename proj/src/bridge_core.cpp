#include "swarmnav/bridge.hpp"

#include "swarmnav/error.hpp"

namespace swarmnav {

using nlohmann::json;

ParsedMessage parse_client_message(const std::string& text) {
  ParsedMessage out;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    out.error = std::string("malformed JSON: ") + e.what();
    return out;
  }
  if (!j.is_object()) {
    out.error = "message must be a JSON object";
    return out;
  }
  if (j.contains("version") && j["version"] != kMessageVersion) {
    out.error = "unsupported message version";
    return out;
  }
  json payload = j;
  payload.erase("version");
  try {
    out.command = payload.get<Command>();
  } catch (const CommandError& e) {
    out.error = e.what();
  } catch (const json::exception& e) {
    out.error = std::string("invalid command: ") + e.what();
  }
  return out;
}

json error_message(const std::string& message) {
  return json{{"type", "error"}, {"version", kMessageVersion}, {"message", message}};
}

json state_message(const SwarmEnv& env, const std::vector<Event>& events, const std::vector<IslandEvent>& island_events,
                   bool paused, double speed) {
  json j = snapshot_json(env, events, island_events, false);
  j["type"] = "state";
  j["version"] = kMessageVersion;
  j["paused"] = paused;
  j["speed"] = speed;
  return j;
}

LiveSession::LiveSession(Scenario scenario, std::uint64_t seed, const std::string& policy_label, LogSink* log)
    : session_(std::move(scenario), seed, make_policy(policy_label), policy_label, log) {}

std::string LiveSession::current_state() const {
  return state_message(session_.env(), last_events_, last_island_events_, paused_, speed_).dump();
}

LiveSession::Tick LiveSession::tick() {
  Tick t;
  for (auto& sub : queue_.drain()) {
    switch (sub.command.kind) {
      case CommandKind::pause: paused_ = true; break;
      case CommandKind::resume: paused_ = false; break;
      case CommandKind::set_speed:
        if (sub.command.speed > 0.0) {
          speed_ = sub.command.speed;
        } else {
          t.replies.push_back({sub.client, error_message("speed must be > 0").dump()});
        }
        break;
      default: held_.push_back(std::move(sub));
    }
  }
  if (paused_ || session_.finished()) {
    t.state = current_state();
    return t;
  }
  std::vector<std::uint64_t> senders;
  for (auto& sub : held_) {
    session_.enqueue(sub.command);
    senders.push_back(sub.client);
  }
  held_.clear();
  StepReport report = session_.advance();
  for (const auto& r : report.rejected) t.replies.push_back({senders[r.index], error_message(r.message).dump()});
  last_events_ = std::move(report.step.events);
  last_island_events_ = std::move(report.step.island_events);
  t.stepped = true;
  t.state = current_state();
  return t;
}

}  // namespace swarmnav
