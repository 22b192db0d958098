#include "gyrocond/service/server.hpp"

#include <array>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "gyrocond/error.hpp"

namespace gyrocond::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".txt") return "text/plain; charset=utf-8";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

namespace {

constexpr std::size_t kMaxQueued = 1024;
constexpr std::size_t kMaxLine = 1 << 20;

const char* kStubPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>gyrocond</title></head>"
    "<body><h1>gyrocond service</h1><p>Console assets are not installed. The command protocol "
    "is available on this port at <code>/ws</code>.</p></body></html>\n";

struct Shared {
  net::io_context ioc;
  ServiceHost& host;
  ServerOptions opts;
  std::set<std::uint64_t> live;  // io thread only

  Shared(ServiceHost& h, ServerOptions o) : host(h), opts(std::move(o)) {}
};

/// Ordered outgoing queue. When it grows past the cap the oldest frames are
/// dropped; replies never are.
class Outbound {
 public:
  virtual ~Outbound() = default;

 protected:
  struct Item {
    std::string data;
    bool frame;
  };

  void enqueue(std::string data, bool frame) {
    out_.push_back({std::move(data), frame});
    if (out_.size() > kMaxQueued) {
      for (auto it = out_.begin() + (writing_ ? 1 : 0); it != out_.end(); ++it) {
        if (it->frame) {
          out_.erase(it);
          break;
        }
      }
    }
    if (!writing_) write_next();
  }

  void write_next() {
    if (out_.empty()) return;
    writing_ = true;
    start_write(out_.front().data);
  }

  void write_done(bool ok) {
    out_.pop_front();
    writing_ = false;
    if (ok) write_next();
  }

  virtual void start_write(const std::string& data) = 0;

  std::deque<Item> out_;
  bool writing_ = false;
};

template <class Session>
ServiceHost::Sink make_sink(const std::shared_ptr<Shared>& shared, const std::shared_ptr<Session>& self) {
  std::weak_ptr<Session> weak = self;
  return [shared, weak](std::string message, bool is_frame) {
    net::post(shared->ioc, [weak, m = std::move(message), is_frame]() mutable {
      if (auto s = weak.lock()) s->deliver(std::move(m), is_frame);
    });
  };
}

class LineSession : public Outbound, public std::enable_shared_from_this<LineSession> {
 public:
  LineSession(tcp::socket socket, std::string initial, std::shared_ptr<Shared> shared)
      : socket_(std::move(socket)), in_(std::move(initial)), shared_(std::move(shared)) {}

  void run() {
    conn_ = shared_->host.connect(make_sink(shared_, shared_from_this()));
    shared_->live.insert(conn_);
    read();
  }

  void deliver(std::string m, bool frame) { enqueue(m + "\n", frame); }

 private:
  void read() {
    net::async_read_until(socket_, net::dynamic_buffer(in_, kMaxLine), '\n',
                          [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                            self->on_read(ec, n);
                          });
  }

  void on_read(beast::error_code ec, std::size_t n) {
    if (ec) {
      close();
      return;
    }
    std::string line = in_.substr(0, n - 1);
    in_.erase(0, n);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) shared_->host.submit(conn_, std::move(line));
    read();
  }

  void start_write(const std::string& data) override {
    net::async_write(socket_, net::buffer(data), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->write_done(!ec);
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    shared_->host.disconnect(conn_);
    shared_->live.erase(conn_);
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
  }

  tcp::socket socket_;
  std::string in_;
  std::shared_ptr<Shared> shared_;
  std::uint64_t conn_ = 0;
  bool closed_ = false;
};

class WsSession : public Outbound, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, std::shared_ptr<Shared> shared)
      : ws_(std::move(socket)), shared_(std::move(shared)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->conn_ = self->shared_->host.connect(make_sink(self->shared_, self));
      self->shared_->live.insert(self->conn_);
      self->read();
    });
  }

  void deliver(std::string m, bool frame) { enqueue(std::move(m), frame); }

 private:
  void read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->shared_->host.disconnect(self->conn_);
        self->shared_->live.erase(self->conn_);
        return;
      }
      std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->shared_->host.submit(self->conn_, std::move(text));
      self->read();
    });
  }

  void start_write(const std::string& data) override {
    ws_.text(true);
    ws_.async_write(net::buffer(data), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->write_done(!ec);
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  std::shared_ptr<Shared> shared_;
  std::uint64_t conn_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, beast::flat_buffer initial, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), buf_(std::move(initial)), shared_(std::move(shared)) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), shared_)->run(std::move(req_));
        return;
      }
      respond(http::status::not_found, "text/plain", "no WebSocket endpoint here; use /ws\n");
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      respond(http::status::method_not_allowed, "text/plain", "only GET and HEAD are served\n");
      return;
    }
    serve_file();
  }

  void serve_file() {
    std::string target(req_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.erase(q);
    if (target.empty() || target.front() != '/' || target.find("..") != std::string::npos) {
      respond(http::status::bad_request, "text/plain", "bad path\n");
      return;
    }
    if (target.back() == '/') target += "index.html";
    const auto& root = shared_->opts.assets;
    if (root.empty() || !std::filesystem::exists(root / "index.html")) {
      if (target == "/index.html") {
        respond(http::status::ok, mime_type("index.html"), kStubPage);
      } else {
        respond(http::status::not_found, "text/plain", "not found\n");
      }
      return;
    }
    const auto path = root / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path)) {
      respond(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    std::ostringstream body;
    body << in.rdbuf();
    respond(http::status::ok, mime_type(path), body.str());
  }

  void respond(http::status status, const std::string& type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "gyrocond");
    res->set(http::field::content_type, type);
    res->keep_alive(req_.keep_alive());
    res->body() = req_.method() == http::verb::head ? std::string() : std::move(body);
    res->prepare_payload();
    if (req_.method() == http::verb::head) res->content_length(body.size());
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
  std::shared_ptr<Shared> shared_;
};

/// Reads the first byte and hands the socket to the matching session.
class Detector : public std::enable_shared_from_this<Detector> {
 public:
  Detector(tcp::socket socket, std::shared_ptr<Shared> shared)
      : socket_(std::move(socket)), shared_(std::move(shared)) {}

  void run() {
    socket_.async_read_some(net::buffer(byte_), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
      if (ec || n != 1) return;
      if (self->byte_[0] == '{') {
        std::make_shared<LineSession>(std::move(self->socket_), std::string(1, '{'), self->shared_)->run();
      } else {
        beast::flat_buffer buf;
        buf.commit(net::buffer_copy(buf.prepare(1), net::buffer(self->byte_)));
        std::make_shared<HttpSession>(std::move(self->socket_), std::move(buf), self->shared_)->run();
      }
    });
  }

 private:
  tcp::socket socket_;
  std::array<char, 1> byte_{};
  std::shared_ptr<Shared> shared_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<Shared> shared;
  tcp::acceptor acceptor;
  std::thread thread;
  bool started = false;

  Impl(ServiceHost& host, ServerOptions opts)
      : shared(std::make_shared<Shared>(host, std::move(opts))), acceptor(shared->ioc) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Detector>(std::move(socket), shared)->run();
      accept();
    });
  }
};

Server::Server(ServiceHost& host, ServerOptions opts) : impl_(std::make_unique<Impl>(host, std::move(opts))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->started) return;
  const auto& o = impl_->shared->opts;
  beast::error_code ec;
  const auto addr = net::ip::make_address(o.address, ec);
  if (ec) throw Error("bad-address", "cannot parse address " + o.address);
  const tcp::endpoint ep(addr, o.port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol());
  a.set_option(net::socket_base::reuse_address(true));
  a.bind(ep, ec);
  if (ec) throw Error("bind-failed", "cannot bind " + o.address + ":" + std::to_string(o.port) + ": " + ec.message());
  a.listen();
  impl_->accept();
  impl_->started = true;
  impl_->thread = std::thread([shared = impl_->shared] { shared->ioc.run(); });
}

void Server::stop() {
  if (!impl_ || !impl_->started) return;
  impl_->started = false;
  impl_->shared->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  for (auto id : impl_->shared->live) impl_->shared->host.disconnect(id);
  impl_->shared->live.clear();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace gyrocond::service
