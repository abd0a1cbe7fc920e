#include "finpanel/geostub.hpp"
#include "finpanel/util.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <thread>

namespace {
volatile std::sig_atomic_t g_stop = 0;
}

int main(int argc, char **argv) {
    CLI::App app{"offline stand-in for the structured geocoding service"};
    std::string db_path;
    int port = 0;
    app.add_option("--db", db_path, "geoservice fixture CSV (kind,key,lat,lon,rank)")
        ->required();
    app.add_option("--port", port, "port to listen on (0 picks a free one)");
    CLI11_PARSE(app, argc, argv);

    try {
        finpanel::geo::StubGeoService service;
        service.load_db(db_path);
        const int bound = service.start(port);
        std::printf("listening on http://127.0.0.1:%d\n", bound);
        std::fflush(stdout);
        std::signal(SIGINT, [](int) { g_stop = 1; });
        std::signal(SIGTERM, [](int) { g_stop = 1; });
        while (!g_stop) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        service.stop();
        return 0;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
