#pragma once
/**
 * @file    service.hpp
 * @brief   Teleoperation sessions and the websocket/HTTP endpoint that
 *          streams them.
 *
 * A TeleopSession owns one environment and advances it once per control
 * tick with the most recently received action (zero-order hold, last
 * writer wins). It has no networking and can be driven directly.
 *
 * TeleopServer (Boost.Beast) exposes
 *   GET  /health             {"status":"ok"}
 *   GET  /tracks             bundled track list
 *   WS   /teleop/{session}   state frames out, action/control messages in
 * All sockets, timers and sessions live on one io_context thread.
 */

#include <narrownav/demo_io.hpp>
#include <narrownav/env.hpp>
#include <narrownav/errors.hpp>
#include <narrownav/track_io.hpp>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace narrownav
{
    class TeleopServer;

    inline nlohmann::json error_frame (const std::string &message)
    {
        return {{"type", "error"}, {"message", message}};
    }

    class TeleopSession
    {
      public:
        TeleopSession (EnvConfig config, std::string id) : id_ (std::move (id)), env_ (std::move (config))
        {
            base_seed_ = env_.config ().seed;
            reset_env ();
        }

        const std::string &id () const { return id_; }
        const NarrowSpaceEnv &env () const { return env_; }
        int episode () const { return episode_; }
        bool recording () const { return recording_; }
        const Action &held_action () const { return held_; }
        const std::vector<DemoRecord> &demos () const { return demos_; }

        void submit_action (const Action &a) { held_ = a.clamped (); }
        void request_reset () { reset_pending_ = true; }
        void set_recording (bool on) { recording_ = on; }

        /// Applies one client message; returns an error frame if it was rejected.
        std::optional<nlohmann::json> handle_message (const std::string &text)
        {
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse (text);
            }
            catch (const nlohmann::json::exception &)
            {
                return error_frame ("message is not valid JSON");
            }
            if (!j.is_object () || !j.contains ("type") || !j["type"].is_string ())
                return error_frame ("message needs a string 'type'");
            const auto type = j["type"].get<std::string> ();
            if (type == "action")
            {
                if (!j.contains ("v") || !j.contains ("w") || !j["v"].is_number () || !j["w"].is_number ())
                    return error_frame ("action needs numeric v and w");
                submit_action ({j["v"].get<double> (), j["w"].get<double> ()});
                return std::nullopt;
            }
            if (type == "reset")
            {
                request_reset ();
                return std::nullopt;
            }
            if (type == "record")
            {
                if (!j.contains ("on") || !j["on"].is_boolean ())
                    return error_frame ("record needs boolean 'on'");
                set_recording (j["on"].get<bool> ());
                return std::nullopt;
            }
            if (type == "record_start" || type == "record_stop")
            {
                set_recording (type == "record_start");
                return std::nullopt;
            }
            return error_frame ("unknown message type '" + type + "'");
        }

        /// One control tick: a pending reset, else one env step with the held
        /// action. Returns nothing while a finished episode waits for reset.
        std::optional<nlohmann::json> tick ()
        {
            if (reset_pending_)
            {
                reset_pending_ = false;
                ++episode_;
                reset_env ();
                return reset_frame ();
            }
            if (env_.done ())
                return std::nullopt;

            const Pose2D before = env_.state ().pose;
            const Action prev = env_.state ().last_action;
            const double timestamp = env_.steps () * env_.config ().dt;
            const StepOutcome out = env_.step (held_);
            if (recording_)
                demos_.push_back ({env_.steps (), episode_, last_obs_.v_obs, last_obs_.extras, prev, held_, timestamp, before});
            last_obs_ = out.observation;
            last_outcome_ = out;
            return state_frame (out);
        }

        /// Distinguished frame sent after every reset (and to newly connected clients).
        nlohmann::json reset_frame () const
        {
            StepOutcome idle;
            idle.observation = last_obs_;
            auto f = state_frame (idle);
            f["reset"] = true;
            f["episode"] = episode_;
            f["safety_region"] = {{"indices", env_.table ().indices}, {"ranges", env_.table ().ranges}};
            return f;
        }

        /// Latest frame for a client joining mid-episode.
        nlohmann::json current_frame () const
        {
            return env_.steps () == 0 ? reset_frame () : state_frame (last_outcome_);
        }

        DemoHeader demo_header () const
        {
            return {env_.config ().world->name, base_seed_, env_.config ().n_scans, env_.config ().max_range,
                    env_.config ().dt};
        }

        void export_demos (const std::filesystem::path &path) const
        {
            if (recording_)
                throw LifecycleError ("stop recording before exporting demos");
            write_demos (path, demo_header (), demos_);
        }

        void clear_demos () { demos_.clear (); }

      private:
        void reset_env () { last_obs_ = env_.reset (base_seed_ + static_cast<std::uint64_t> (episode_)); }

        nlohmann::json state_frame (const StepOutcome &out) const
        {
            const auto &s = env_.state ();
            return {{"type", "state"},
                    {"session", id_},
                    {"step", env_.steps ()},
                    {"pose", {s.pose.x, s.pose.y, s.pose.theta}},
                    {"action", {s.last_action.v, s.last_action.w}},
                    {"scans", env_.raw_scans ()},
                    {"v_obs", out.observation.v_obs},
                    {"extras", out.observation.extras},
                    {"reward", out.reward},
                    {"reward_components",
                     {{"f", out.info.forward},
                      {"o", out.info.obstacle},
                      {"m", out.info.middle},
                      {"t", out.info.time},
                      {"wp", out.info.waypoint}}},
                    {"done", out.done},
                    {"done_reason", to_string (out.done_reason)},
                    {"recording", recording_}};
        }

        std::string id_;
        NarrowSpaceEnv env_;
        std::uint64_t base_seed_{0};
        int episode_{0};
        Action held_;
        bool reset_pending_{false};
        bool recording_{false};
        Observation last_obs_;
        StepOutcome last_outcome_;
        std::vector<DemoRecord> demos_;
    };

    /// Bundled track listing served at GET /tracks.
    inline nlohmann::json list_tracks (const std::filesystem::path &dir)
    {
        nlohmann::json out = nlohmann::json::array ();
        std::error_code ec;
        if (!std::filesystem::is_directory (dir, ec))
            return out;
        std::vector<std::filesystem::path> files;
        for (const auto &entry : std::filesystem::directory_iterator (dir, ec))
            if (entry.path ().extension () == ".json")
                files.push_back (entry.path ());
        std::sort (files.begin (), files.end ());
        for (const auto &f : files)
        {
            try
            {
                const TrackWorld w = load_track (f);
                out.push_back ({{"name", w.name}, {"file", f.filename ().string ()}, {"description", w.description},
                                {"waypoints", w.waypoints.size ()}});
            }
            catch (const std::exception &)
            {
                // Not a track file.
            }
        }
        return out;
    }

    struct ServerOptions
    {
        std::string host{"127.0.0.1"};
        unsigned short port{8765};  ///< 0 picks a free port
        std::filesystem::path track_dir;
        bool pace{true};            ///< wall-clock ticks of env dt; otherwise as fast as possible
        std::filesystem::path demo_dir;  ///< if set, demos are exported here on record stop
    };

    namespace service_detail
    {
        namespace beast = boost::beast;
        namespace http = beast::http;
        namespace websocket = beast::websocket;
        namespace net = boost::asio;
        using tcp = net::ip::tcp;

        class SessionHost;

        class WsClient : public std::enable_shared_from_this<WsClient>
        {
          public:
            WsClient (tcp::socket &&socket, std::shared_ptr<SessionHost> host)
                : ws_ (std::move (socket)), host_ (std::move (host))
            {
            }

            void accept (http::request<http::string_body> req);
            void send (std::shared_ptr<const std::string> text)
            {
                queue_.push_back (std::move (text));
                if (queue_.size () == 1)
                    write_next ();
            }
            void close ()
            {
                beast::error_code ec;
                beast::get_lowest_layer (ws_).socket ().close (ec);
            }

          private:
            void read_next ();
            void write_next ()
            {
                ws_.text (true);
                ws_.async_write (net::buffer (*queue_.front ()),
                                 [self = shared_from_this ()] (beast::error_code ec, std::size_t) {
                                     if (ec)
                                         return self->drop ();
                                     self->queue_.pop_front ();
                                     if (!self->queue_.empty ())
                                         self->write_next ();
                                 });
            }
            void drop ();

            websocket::stream<beast::tcp_stream> ws_;
            beast::flat_buffer buffer_;
            std::deque<std::shared_ptr<const std::string>> queue_;
            std::shared_ptr<SessionHost> host_;
            bool dropped_{false};
        };

        class SessionHost : public std::enable_shared_from_this<SessionHost>
        {
          public:
            SessionHost (net::io_context &ioc, EnvConfig config, std::string id, bool pace)
                : session_ (std::move (config), std::move (id)), timer_ (ioc), pace_ (pace)
            {
            }

            void add (const std::shared_ptr<WsClient> &client)
            {
                clients_.insert (client);
                client->send (std::make_shared<const std::string> (session_.current_frame ().dump ()));
                if (!ticking_)
                {
                    ticking_ = true;
                    next_ = std::chrono::steady_clock::now ();
                    schedule ();
                }
            }

            void remove (const std::shared_ptr<WsClient> &client)
            {
                clients_.erase (client);
                if (clients_.empty ())
                {
                    ticking_ = false;
                    timer_.cancel ();
                }
            }

            void on_message (const std::shared_ptr<WsClient> &client, const std::string &text)
            {
                const bool was_recording = session_.recording ();
                if (auto err = session_.handle_message (text))
                    return client->send (std::make_shared<const std::string> (err->dump ()));
                if (was_recording == session_.recording ())
                    return;
                nlohmann::json ack{{"type", "record"}, {"on", session_.recording ()},
                                   {"records", session_.demos ().size ()}};
                if (!session_.recording () && !demo_dir_.empty ())
                {
                    const auto path = demo_dir_ / (session_.id () + "-" + std::to_string (exports_++) + ".jsonl");
                    try
                    {
                        session_.export_demos (path);
                        session_.clear_demos ();
                        ack["file"] = path.string ();
                    }
                    catch (const std::exception &e)
                    {
                        ack = error_frame (e.what ());
                    }
                }
                auto frame = std::make_shared<const std::string> (ack.dump ());
                for (const auto &c : clients_)
                    c->send (frame);
            }

            void shutdown ()
            {
                ticking_ = false;
                timer_.cancel ();
                for (const auto &c : std::set<std::shared_ptr<WsClient>> (clients_))
                    c->close ();
                clients_.clear ();
            }

          private:
            void schedule ()
            {
                const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration> (
                    std::chrono::duration<double> (session_.env ().config ().dt));
                next_ += pace_ ? period : std::chrono::steady_clock::duration::zero ();
                timer_.expires_at (next_);
                timer_.async_wait ([self = shared_from_this ()] (beast::error_code ec) {
                    if (ec || !self->ticking_)
                        return;
                    self->on_tick ();
                });
            }

            void on_tick ()
            {
                if (auto frame = session_.tick ())
                {
                    auto text = std::make_shared<const std::string> (frame->dump ());
                    for (const auto &c : clients_)
                        c->send (text);
                }
                schedule ();
            }

            TeleopSession session_;
            net::steady_timer timer_;
            bool pace_;
            bool ticking_{false};
            std::chrono::steady_clock::time_point next_;
            std::set<std::shared_ptr<WsClient>> clients_;

            std::filesystem::path demo_dir_;
            int exports_{0};

            friend class ::narrownav::TeleopServer;
        };

        inline void WsClient::accept (http::request<http::string_body> req)
        {
            beast::get_lowest_layer (ws_).expires_never ();
            ws_.set_option (websocket::stream_base::timeout::suggested (beast::role_type::server));
            ws_.async_accept (req, [self = shared_from_this ()] (beast::error_code ec) {
                if (ec)
                    return;
                self->host_->add (self);
                self->read_next ();
            });
        }

        inline void WsClient::read_next ()
        {
            ws_.async_read (buffer_, [self = shared_from_this ()] (beast::error_code ec, std::size_t) {
                if (ec)
                    return self->drop ();
                const std::string text = beast::buffers_to_string (self->buffer_.data ());
                self->buffer_.consume (self->buffer_.size ());
                self->host_->on_message (self, text);
                self->read_next ();
            });
        }

        inline void WsClient::drop ()
        {
            if (dropped_)
                return;
            dropped_ = true;
            host_->remove (shared_from_this ());
        }
    }  // namespace service_detail

    class TeleopServer
    {
      public:
        TeleopServer (EnvConfig config, ServerOptions options)
            : config_ (std::move (config)), options_ (std::move (options)), acceptor_ (ioc_)
        {
            config_.validate ();
        }

        ~TeleopServer () { stop (); }

        TeleopServer (const TeleopServer &) = delete;
        TeleopServer &operator= (const TeleopServer &) = delete;

        /// Binds and starts the io thread. Throws IoError if the address is unavailable.
        void start ()
        {
            namespace net = service_detail::net;
            using service_detail::tcp;
            boost::system::error_code ec;
            const auto address = net::ip::make_address (options_.host, ec);
            if (ec)
                throw ConfigError ("bad bind address '" + options_.host + "'");
            const tcp::endpoint endpoint (address, options_.port);
            acceptor_.open (endpoint.protocol (), ec);
            if (!ec)
                acceptor_.bind (endpoint, ec);
            if (!ec)
                acceptor_.listen (net::socket_base::max_listen_connections, ec);
            if (ec)
                throw IoError ("cannot listen on " + options_.host + ":" + std::to_string (options_.port) + ": " +
                               ec.message ());
            port_ = acceptor_.local_endpoint ().port ();
            accept_next ();
            thread_ = std::thread ([this] { ioc_.run (); });
        }

        /// Stops the server on SIGINT/SIGTERM. Call before start().
        void stop_on_signals ()
        {
            signals_ = std::make_unique<service_detail::net::signal_set> (ioc_, SIGINT, SIGTERM);
            signals_->async_wait ([this] (boost::system::error_code ec, int) {
                if (!ec)
                    shutdown ();
            });
        }

        /// Blocks until the server stops.
        void wait ()
        {
            if (thread_.joinable ())
                thread_.join ();
        }

        void stop ()
        {
            if (!thread_.joinable ())
                return;
            service_detail::net::post (ioc_, [this] { shutdown (); });
            thread_.join ();
        }

        unsigned short port () const { return port_; }

      private:
        using tcp = service_detail::tcp;

        void shutdown ()
        {
            boost::system::error_code ec;
            acceptor_.close (ec);
            if (signals_)
                signals_->cancel (ec);
            for (auto &[id, host] : sessions_)
                host->shutdown ();
            ioc_.stop ();
        }

        void accept_next ()
        {
            acceptor_.async_accept ([this] (boost::system::error_code ec, tcp::socket socket) {
                if (ec)
                    return;
                handle_connection (std::make_shared<Connection> (std::move (socket)));
                accept_next ();
            });
        }

        struct Connection
        {
            explicit Connection (tcp::socket &&s) : stream (std::move (s)) {}
            service_detail::beast::tcp_stream stream;
            service_detail::beast::flat_buffer buffer;
            service_detail::http::request<service_detail::http::string_body> req;
        };

        void handle_connection (std::shared_ptr<Connection> conn)
        {
            namespace http = service_detail::http;
            conn->stream.expires_after (std::chrono::seconds (30));
            http::async_read (conn->stream, conn->buffer, conn->req,
                              [this, conn] (boost::system::error_code ec, std::size_t) {
                                  if (ec)
                                      return;
                                  route (conn);
                              });
        }

        void route (const std::shared_ptr<Connection> &conn)
        {
            namespace http = service_detail::http;
            namespace websocket = service_detail::websocket;
            const std::string target (conn->req.target ());
            static const std::regex teleop_path ("^/teleop/([A-Za-z0-9_.-]{1,64})$");
            std::smatch m;
            if (websocket::is_upgrade (conn->req))
            {
                if (!std::regex_match (target, m, teleop_path))
                    return respond (conn, http::status::not_found, error_frame ("unknown socket path").dump ());
                auto client = std::make_shared<service_detail::WsClient> (conn->stream.release_socket (),
                                                                          session (m[1].str ()));
                client->accept (std::move (conn->req));
                return;
            }
            if (conn->req.method () != http::verb::get)
                return respond (conn, http::status::method_not_allowed, error_frame ("GET only").dump ());
            if (target == "/health")
                return respond (conn, http::status::ok, nlohmann::json{{"status", "ok"}}.dump ());
            if (target == "/tracks")
                return respond (conn, http::status::ok, nlohmann::json{{"tracks", list_tracks (options_.track_dir)}}.dump ());
            respond (conn, http::status::not_found, error_frame ("not found").dump ());
        }

        void respond (const std::shared_ptr<Connection> &conn, service_detail::http::status status, std::string body)
        {
            namespace http = service_detail::http;
            auto res = std::make_shared<http::response<http::string_body>> (status, conn->req.version ());
            res->set (http::field::content_type, "application/json");
            res->set (http::field::access_control_allow_origin, "*");
            res->keep_alive (false);
            res->body () = std::move (body);
            res->prepare_payload ();
            http::async_write (conn->stream, *res, [conn, res] (boost::system::error_code, std::size_t) {
                boost::system::error_code ignored;
                conn->stream.socket ().shutdown (tcp::socket::shutdown_send, ignored);
            });
        }

        std::shared_ptr<service_detail::SessionHost> session (const std::string &id)
        {
            auto &host = sessions_[id];
            if (!host)
            {
                host = std::make_shared<service_detail::SessionHost> (ioc_, config_, id, options_.pace);
                host->demo_dir_ = options_.demo_dir;
            }
            return host;
        }

        EnvConfig config_;
        ServerOptions options_;
        service_detail::net::io_context ioc_;
        tcp::acceptor acceptor_;
        std::unique_ptr<service_detail::net::signal_set> signals_;
        std::thread thread_;
        unsigned short port_{0};
        std::map<std::string, std::shared_ptr<service_detail::SessionHost>> sessions_;
    };

}  // namespace narrownav
