// quotecast: capture, broker, monitor and prune for RESP-backed quote streams.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "quotecast/broker.hpp"
#include "quotecast/capture.hpp"
#include "quotecast/monitor.hpp"
#include "quotecast/prune.hpp"
#include "quotecast/render.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

quotecast::ShutdownSignal g_shutdown;

void handle_signal(int) { g_shutdown.request(); }

void install_signal_handlers() {
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
}

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 6379;
};

// QUOTECAST_URL ("host:port" or "host") fills in whatever flags left default.
Endpoint resolve_endpoint(const std::string& host_flag, int port_flag) {
    Endpoint ep;
    const char* env = std::getenv("QUOTECAST_URL");
    if (env != nullptr && *env != '\0') {
        std::string url(env);
        auto colon = url.rfind(':');
        if (colon != std::string::npos) {
            ep.host = url.substr(0, colon);
            ep.port = static_cast<std::uint16_t>(std::stoi(url.substr(colon + 1)));
        } else {
            ep.host = url;
        }
    }
    if (!host_flag.empty()) ep.host = host_flag;
    if (port_flag > 0) ep.port = static_cast<std::uint16_t>(port_flag);
    return ep;
}

std::vector<std::string> split_symbols(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t pos = csv.find(',', start);
        if (pos == std::string::npos) pos = csv.size();
        if (pos > start) out.push_back(csv.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

class TerminalView final : public quotecast::monitor::ViewSink {
public:
    TerminalView(quotecast::monitor::RenderOptions options, bool enabled)
        : options_(options), enabled_(enabled) {}

    void show(const std::map<std::string, quotecast::monitor::TimeSeries>& series) override {
        if (!enabled_) return;
        std::cout << "\n" << quotecast::monitor::render(series, options_) << std::flush;
    }

private:
    quotecast::monitor::RenderOptions options_;
    bool enabled_;
};

int run_broker(const std::string& bind, int port) {
    quotecast::broker::BrokerConfig config;
    config.bind_address = bind;
    config.port = static_cast<std::uint16_t>(port);
    quotecast::broker::Broker broker(config);
    broker.start();
    std::cerr << "broker listening on " << bind << ":" << broker.port() << "\n";

    // Poll the signal flag; Broker::wait() would block past Ctrl-C otherwise.
    while (!g_shutdown.requested()) {
        g_shutdown.wait_for(std::chrono::milliseconds(200));
    }
    broker.stop();
    return 0;
}

std::unique_ptr<quotecast::feed::QuoteSource> make_source(const std::string& spec,
                                                          std::uint64_t seed) {
    if (spec == "synthetic") {
        quotecast::feed::SyntheticConfig config;
        config.seed = seed;
        return std::make_unique<quotecast::feed::SyntheticSource>(config);
    }
    if (spec.rfind("replay:", 0) == 0) {
        return quotecast::feed::ReplaySource::from_file(spec.substr(7));
    }
    if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0) {
        return std::make_unique<quotecast::feed::HttpSource>(spec);
    }
    throw CLI::ValidationError("--source must be synthetic, replay:FILE, or an http(s) url");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"market quote capture and pub/sub monitoring toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    bool show_version = false;
    app.add_flag("--version", show_version, "print version and exit");

    // broker
    auto* broker_cmd = app.add_subcommand("broker", "run the in-memory RESP broker");
    std::string bind = "127.0.0.1";
    int broker_port = 6379;
    broker_cmd->add_option("--bind", bind, "bind address");
    broker_cmd->add_option("--port", broker_port, "tcp port");

    // capture
    auto* capture_cmd = app.add_subcommand("capture", "poll a quote source, store and publish");
    std::string host_flag;
    int port_flag = 0;
    std::string symbols_csv = "BTC=F,CL=F,ES=F,GC=F";
    int tell_index = 2;
    std::string source_spec = "synthetic";
    int poll_secs = 10;
    int backoff_secs = 15;
    std::uint64_t seed = 0;
    std::size_t max_polls = 0;
    capture_cmd->add_option("--host", host_flag, "broker host");
    capture_cmd->add_option("--port", port_flag, "broker port");
    capture_cmd->add_option("--symbols", symbols_csv, "comma-separated symbol list");
    capture_cmd->add_option("--tell-index", tell_index, "index of the volume-tell symbol");
    capture_cmd->add_option("--source", source_spec, "synthetic | replay:FILE | http(s)://...");
    capture_cmd->add_option("--poll-secs", poll_secs, "poll interval seconds");
    capture_cmd->add_option("--backoff-secs", backoff_secs, "error backoff seconds");
    capture_cmd->add_option("--seed", seed, "synthetic source seed");
    capture_cmd->add_option("--max-polls", max_polls, "stop after N polls (0 = forever)");

    // monitor
    auto* monitor_cmd = app.add_subcommand("monitor", "subscribe and chart live quotes");
    std::string mon_host;
    int mon_port = 0;
    std::string mon_symbols = "BTC=F,CL=F,ES=F,GC=F";
    std::size_t ndays = 2;
    std::size_t minobs = 1500;
    std::string export_path;
    bool no_chart = false;
    bool ascii_chart = false;
    monitor_cmd->add_option("--host", mon_host, "broker host");
    monitor_cmd->add_option("--port", mon_port, "broker port");
    monitor_cmd->add_option("--symbols", mon_symbols, "comma-separated symbol list");
    monitor_cmd->add_option("--ndays", ndays, "window to the most recent N days");
    monitor_cmd->add_option("--minobs", minobs, "min observations for a day to qualify");
    monitor_cmd->add_option("--export", export_path, "write the series to this CSV on exit");
    monitor_cmd->add_flag("--no-chart", no_chart, "suppress the terminal chart");
    monitor_cmd->add_flag("--ascii", ascii_chart, "plain-ASCII chart characters");

    // prune
    auto* prune_cmd = app.add_subcommand("prune", "apply the retention policy once");
    std::string prune_host;
    int prune_port = 0;
    std::string prune_symbols;
    int max_age_days = 30;
    std::size_t max_points = 200'000;
    bool dry_run = false;
    prune_cmd->add_option("--host", prune_host, "broker host");
    prune_cmd->add_option("--port", prune_port, "broker port");
    prune_cmd->add_option("--symbols", prune_symbols, "comma-separated symbol list")
        ->required();
    prune_cmd->add_option("--max-age-days", max_age_days, "age cap in days");
    prune_cmd->add_option("--max-points", max_points, "per-symbol point cap (0 = unlimited)");
    prune_cmd->add_flag("--dry-run", dry_run, "report counts without removing");

    auto* version_cmd = app.add_subcommand("version", "print version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // usage problems exit 2, --help exits 0
    }

    if (show_version || version_cmd->parsed()) {
        std::cout << "quotecast " << kVersion << "\n";
        return 0;
    }

    install_signal_handlers();
    try {
        if (broker_cmd->parsed()) return run_broker(bind, broker_port);

        if (capture_cmd->parsed()) {
            Endpoint ep = resolve_endpoint(host_flag, port_flag);
            auto symbols = split_symbols(symbols_csv);
            quotecast::feed::SymbolSet set(symbols, static_cast<std::size_t>(tell_index));
            auto source = make_source(source_spec, seed);
            auto conn = quotecast::connect(ep.host, ep.port);
            quotecast::SystemClock clock(&g_shutdown);
            quotecast::capture::CaptureState state;
            quotecast::capture::CaptureOptions options;
            options.poll_interval = std::chrono::seconds(poll_secs);
            options.error_backoff = std::chrono::seconds(backoff_secs);
            options.max_polls = max_polls;
            auto stats = quotecast::capture::run_capture(
                *conn, *source, set, state, clock, g_shutdown, options,
                [](const std::string& line) { std::cerr << line << "\n"; });
            std::cerr << "capture done: " << stats.polls << " polls, " << stats.stores
                      << " stored batches\n";
            return 0;
        }

        if (monitor_cmd->parsed()) {
            Endpoint ep = resolve_endpoint(mon_host, mon_port);
            auto symbols = split_symbols(mon_symbols);
            quotecast::monitor::CallbackRegistry registry;
            for (const auto& s : symbols) registry.register_default(s);
            quotecast::monitor::RenderOptions render_options;
            render_options.ascii_only = ascii_chart;
            TerminalView view(render_options, !no_chart);
            quotecast::SystemClock clock(&g_shutdown);
            quotecast::monitor::MonitorOptions options;
            options.ndays = ndays;
            options.minobs = minobs;
            std::map<std::string, quotecast::monitor::TimeSeries> series;
            auto conn = quotecast::connect(ep.host, ep.port);
            quotecast::monitor::run_monitor(
                std::move(conn), symbols, registry, view, clock, g_shutdown, options,
                [&ep] { return quotecast::connect(ep.host, ep.port); }, &series);
            if (!export_path.empty()) {
                quotecast::monitor::export_csv(series, export_path);
                std::cerr << "series exported to " << export_path << "\n";
            }
            return 0;
        }

        if (prune_cmd->parsed()) {
            Endpoint ep = resolve_endpoint(prune_host, prune_port);
            auto conn = quotecast::connect(ep.host, ep.port);
            quotecast::tools::RetentionPolicy policy;
            policy.max_age = std::chrono::hours(24) * max_age_days;
            policy.max_points = max_points;
            quotecast::SystemClock clock;
            auto result = quotecast::tools::prune(*conn, split_symbols(prune_symbols), policy,
                                                  clock.now(), dry_run);
            for (const auto& [sym, count] : result.removed) {
                std::cout << sym << (dry_run ? " would remove " : " removed ") << count << "\n";
            }
            for (const auto& sym : result.failed) {
                std::cerr << sym << " failed\n";
            }
            return result.failed.empty() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "quotecast: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
