// HTTP front end for the session service.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "prefcone/http.hpp"

using namespace prefcone;

namespace {

httplib::Server* g_server = nullptr;

void stop(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preference elicitation session service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "sessions";
    std::size_t cap = kDefaultGeneratorCap;
    app.add_option("--host", host, "Listen address")->envname("PREFCONE_HOST")->capture_default_str();
    app.add_option("--port", port, "Listen port; 0 picks a free one")
        ->envname("PREFCONE_PORT")
        ->check(CLI::Range(0, 65535))
        ->capture_default_str();
    app.add_option("--data-dir", data_dir, "Directory for .mlsess.json files")
        ->envname("PREFCONE_DATA_DIR")
        ->capture_default_str();
    app.add_option("--generator-cap", cap, "Largest dimension for ray enumeration")
        ->envname("PREFCONE_GENERATOR_CAP")
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    service::SessionService svc({data_dir, cap});
    for (const auto& [file, why] : svc.load_errors()) std::cerr << "skipped " << file << ": " << why << "\n";

    httplib::Server server;
    service::bind(server, svc);

    g_server = &server;
    std::signal(SIGINT, stop);
    std::signal(SIGTERM, stop);

    if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port < 0) {
            std::cerr << "cannot bind " << host << "\n";
            return 2;
        }
        std::cerr << "listening on " << host << ":" << port << "\n";
        return server.listen_after_bind() ? 0 : 2;
    }
    std::cerr << "listening on " << host << ":" << port << "\n";
    return server.listen(host, port) ? 0 : 2;
}
