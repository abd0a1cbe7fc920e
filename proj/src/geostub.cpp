#include "finpanel/geostub.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <httplib.h>

#include <atomic>
#include <sstream>
#include <thread>

namespace finpanel::geo {

namespace {

struct Entry {
    double lat = 0.0;
    double lon = 0.0;
    int rank = 0;
};

std::string norm_join(std::initializer_list<std::string> parts) {
    std::string out;
    bool first = true;
    for (const auto &p : parts) {
        if (!first) {
            out.push_back('|');
        }
        out += to_lower(trim(p));
        first = false;
    }
    return out;
}

} // namespace

struct StubGeoService::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<std::size_t> requests{0};
    std::map<std::string, Entry> house_keys;
    std::map<std::string, Entry> street_keys;
    std::map<std::string, Entry> city_keys;
};

StubGeoService::StubGeoService() : impl_(std::make_unique<Impl>()) {
    impl_->server.Get("/search", [this](const httplib::Request &req, httplib::Response &res) {
        ++impl_->requests;
        const std::string region = req.get_param_value("region");
        const std::string city = req.get_param_value("city");
        const std::string street = req.get_param_value("street");
        const std::string house = req.get_param_value("house");
        const Entry *hit = nullptr;
        if (!house.empty()) {
            auto it = impl_->house_keys.find(norm_join({region, city, street, house}));
            if (it != impl_->house_keys.end()) {
                hit = &it->second;
            }
        } else if (!street.empty()) {
            auto it = impl_->street_keys.find(norm_join({region, city, street}));
            if (it != impl_->street_keys.end()) {
                hit = &it->second;
            }
        } else {
            auto it = impl_->city_keys.find(norm_join({region, city}));
            if (it != impl_->city_keys.end()) {
                hit = &it->second;
            }
        }
        std::ostringstream body;
        if (hit) {
            body << "[{\"lat\": " << hit->lat << ", \"lon\": " << hit->lon
                 << ", \"address_rank\": " << hit->rank << "}]";
        } else {
            body << "[]";
        }
        res.set_content(body.str(), "application/json");
    });
}

StubGeoService::~StubGeoService() { stop(); }

void StubGeoService::load_db(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 5) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        Entry entry{std::stod(row[2]), std::stod(row[3]),
                    static_cast<int>(parse_int(row[4]).value_or(0))};
        if (row[0] == "house") {
            impl_->house_keys[row[1]] = entry;
        } else if (row[0] == "street") {
            impl_->street_keys[row[1]] = entry;
        } else if (row[0] == "city") {
            impl_->city_keys[row[1]] = entry;
        } else {
            throw PipelineError("MALFORMED_ROW", "unknown stub entry kind '" + row[0] + "'");
        }
    }
}

int StubGeoService::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        impl_->server.bind_to_port("127.0.0.1", port);
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void StubGeoService::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string StubGeoService::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::size_t StubGeoService::request_count() const { return impl_->requests.load(); }

} // namespace finpanel::geo
