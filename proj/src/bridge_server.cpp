#include "swarmnav/bridge_server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "swarmnav/error.hpp"
#include "swarmnav/log.hpp"

namespace swarmnav {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxQueued = 4096;

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, std::uint64_t id, LiveSession& live, std::function<void(std::uint64_t)> on_close)
      : ws_(std::move(socket)), id_(id), live_(live), on_close_(std::move(on_close)) {}

  void start(std::string first_state) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this(), first = std::move(first_state)](beast::error_code ec) mutable {
      if (ec) return self->close();
      self->open_ = true;
      self->send(std::move(first));
      self->read();
    });
  }

  // Must run on the I/O thread.
  void send(std::string text) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueued) {
      log_warning("bridge client " + std::to_string(id_) + " is not keeping up; disconnecting");
      return close();
    }
    queue_.push_back(std::make_shared<std::string>(std::move(text)));
    if (open_ && queue_.size() == 1) write();
  }

  void shutdown() {
    if (closed_ || !open_) return;
    ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) { self->close(); });
  }

  std::uint64_t id() const { return id_; }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      ParsedMessage m = parse_client_message(text);
      if (m.command) {
        self->live_.submit(self->id_, *m.command);
      } else {
        self->send(error_message(m.error).dump());
      }
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    queue_.clear();
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
    on_close_(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::uint64_t id_;
  LiveSession& live_;
  std::function<void(std::uint64_t)> on_close_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<std::string>> queue_;
  bool open_ = false;
  bool closed_ = false;
};

}  // namespace

struct BridgeServer::Impl {
  Impl(LiveSession& l, ServerOptions o) : live(l), options(std::move(o)), acceptor(io) {}

  LiveSession& live;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::map<std::uint64_t, std::shared_ptr<Client>> clients;  // I/O thread only
  std::atomic<std::size_t> client_count{0};
  std::uint64_t next_id = 1;
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> stopping{false};
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool started = false;
  bool stopped = false;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (!stopping) accept();
        return;
      }
      const std::uint64_t id = next_id++;
      auto c = std::make_shared<Client>(std::move(socket), id, live, [this](std::uint64_t gone) {
        clients.erase(gone);
        client_count = clients.size();
      });
      clients.emplace(id, c);
      client_count = clients.size();
      c->start(latest_state());
      accept();
    });
  }

  std::mutex state_mutex;
  std::string state;
  std::string latest_state() {
    std::lock_guard<std::mutex> lock(state_mutex);
    return state;
  }

  void simulate() {
    using clock = std::chrono::steady_clock;
    auto next = clock::now();
    while (!stopping) {
      LiveSession::Tick t;
      try {
        t = live.tick();
      } catch (const std::exception& e) {
        log(LogLevel::error, std::string("simulation stopped: ") + e.what());
        break;
      }
      {
        std::lock_guard<std::mutex> lock(state_mutex);
        state = t.state;
      }
      asio::post(io, [this, text = std::move(t.state), replies = std::move(t.replies)]() mutable {
        for (auto& r : replies) {
          if (auto it = clients.find(r.client); it != clients.end()) it->second->send(std::move(r.text));
        }
        for (auto& [id, c] : clients) c->send(text);
      });
      const double idle = 1.0 / options.min_broadcast_hz;
      double period = idle;
      if (t.stepped) period = std::min(idle, 1.0 / (options.steps_per_second * live.speed()));
      next += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(period));
      const auto now = clock::now();
      if (next < now) next = now;
      std::unique_lock<std::mutex> lock(stop_mutex);
      stop_cv.wait_until(lock, next, [this] { return stopping.load(); });
    }
  }
};

BridgeServer::BridgeServer(LiveSession& live, ServerOptions options)
    : impl_(std::make_unique<Impl>(live, std::move(options))) {
  if (!(impl_->options.steps_per_second > 0.0) || !(impl_->options.min_broadcast_hz > 0.0)) {
    throw ConfigError("server rates must be > 0");
  }
}

BridgeServer::~BridgeServer() { stop(); }

void BridgeServer::start() {
  if (impl_->started) throw ContractError("server already started");
  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->options.address, ec);
  if (ec) throw ConfigError("invalid address " + impl_->options.address);
  const tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error("cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port) + ": " +
                      ec.message());
  impl_->state = impl_->live.current_state();
  impl_->started = true;
  impl_->accept();
  impl_->io_thread = std::thread([this] {
    auto guard = asio::make_work_guard(impl_->io);
    impl_->io.run();
  });
  impl_->sim_thread = std::thread([this] { impl_->simulate(); });
}

void BridgeServer::stop() {
  if (!impl_->started || impl_->stopped) return;
  {
    std::lock_guard<std::mutex> lock(impl_->stop_mutex);
    impl_->stopping = true;
  }
  impl_->stop_cv.notify_all();
  if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
  asio::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    auto clients = impl_->clients;
    for (auto& [id, c] : clients) c->shutdown();
  });
  // Give close handshakes a moment before tearing down the loop.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  impl_->io.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  impl_->stopped = true;
  impl_->stop_cv.notify_all();
}

void BridgeServer::wait() {
  std::unique_lock<std::mutex> lock(impl_->stop_mutex);
  impl_->stop_cv.wait(lock, [this] { return impl_->stopping.load(); });
}

unsigned short BridgeServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

std::size_t BridgeServer::client_count() const { return impl_->client_count; }

}  // namespace swarmnav
