#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/session.hpp"

namespace swarmnav {

/// Client message parsed into a command, or the reason it was refused.
struct ParsedMessage {
  std::optional<Command> command;
  std::string error;
};

/// Accepts {"type": <command>, "version": 1, ...payload}. A missing version
/// is accepted; a different one is refused.
ParsedMessage parse_client_message(const std::string& text);

nlohmann::json error_message(const std::string& message);
nlohmann::json state_message(const SwarmEnv& env, const std::vector<Event>& events,
                             const std::vector<IslandEvent>& island_events, bool paused, double speed);

/// Serialized hand-off from network threads to the simulation loop.
template <class T>
class CommandQueue {
 public:
  void push(T item) {
    std::lock_guard<std::mutex> lock(mutex_);
    items_.push_back(std::move(item));
  }
  std::vector<T> drain() {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<T> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<T> items_;
};

/// A command together with the client that sent it (0 = local).
struct Submission {
  std::uint64_t client = 0;
  Command command;
};

/// Reply addressed to one client.
struct Reply {
  std::uint64_t client = 0;
  std::string text;
};

/// Session driven by externally submitted commands. submit() may be called
/// from any thread; tick() belongs to the simulation loop.
class LiveSession {
 public:
  LiveSession(Scenario scenario, std::uint64_t seed, const std::string& policy_label, LogSink* log = nullptr);

  void submit(std::uint64_t client, const Command& command) { queue_.push({client, command}); }

  struct Tick {
    bool stepped = false;
    std::string state;            // state message after the tick
    std::vector<Reply> replies;   // error replies for rejected commands
  };

  /// Applies pause/resume/set_speed from the queue, hands world commands to
  /// the session and advances one step unless paused or finished.
  Tick tick();

  bool paused() const { return paused_; }
  double speed() const { return speed_; }
  bool finished() const { return session_.finished(); }
  const Session& session() const { return session_; }
  std::string current_state() const;

 private:
  Session session_;
  CommandQueue<Submission> queue_;
  std::vector<Submission> held_;  // world commands waiting while paused
  bool paused_ = false;
  double speed_ = 1.0;
  std::vector<Event> last_events_;
  std::vector<IslandEvent> last_island_events_;
};

}  // namespace swarmnav
