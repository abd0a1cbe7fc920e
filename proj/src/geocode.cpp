#include "finpanel/geocode.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

namespace finpanel::geo {

namespace {

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.7f", v);
    return buf;
}

double json_number(const nlohmann::json &j, const char *what) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        try {
            return std::stod(j.get<std::string>());
        } catch (const std::exception &) {
        }
    }
    throw MalformedResponse(std::string("bad ") + what + " in geocoder response");
}

} // namespace

struct HttpGeocodeClient::Impl {
    std::string base_url;
    httplib::Client client;

    explicit Impl(std::string url) : base_url(std::move(url)), client(base_url) {
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(30, 0);
    }
};

HttpGeocodeClient::HttpGeocodeClient(std::string base_url)
    : impl_(std::make_unique<Impl>(std::move(base_url))) {}

HttpGeocodeClient::~HttpGeocodeClient() = default;

std::optional<GeocodeClient::Result> HttpGeocodeClient::query(const GeoQuery &q) {
    httplib::Params params{{"format", "jsonv2"}};
    if (!q.region.empty()) {
        params.emplace("region", q.region);
    }
    if (!q.city.empty()) {
        params.emplace("city", q.city);
    }
    if (!q.street.empty()) {
        params.emplace("street", q.street);
    }
    if (!q.house.empty()) {
        params.emplace("house", q.house);
    }
    auto res = impl_->client.Get("/search", params, httplib::Headers{});
    if (!res) {
        throw ServiceUnavailable("geocoder unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ServiceUnavailable("geocoder returned status " + std::to_string(res->status));
    }
    nlohmann::json payload = nlohmann::json::parse(res->body, nullptr, false);
    if (payload.is_discarded() || !payload.is_array()) {
        throw MalformedResponse("geocoder response is not a JSON array");
    }
    if (payload.empty()) {
        return std::nullopt;
    }
    const auto &hit = payload[0];
    Result result;
    result.lat = json_number(hit.contains("lat") ? hit["lat"] : nlohmann::json(), "lat");
    result.lon = json_number(hit.contains("lon") ? hit["lon"] : nlohmann::json(), "lon");
    if (hit.contains("address_rank")) {
        result.rank = static_cast<int>(json_number(hit["address_rank"], "address_rank"));
    } else if (hit.contains("place_rank")) {
        result.rank = static_cast<int>(json_number(hit["place_rank"], "place_rank"));
    } else {
        throw MalformedResponse("geocoder response lacks an address rank");
    }
    return result;
}

GeocodeCache::GeocodeCache(const std::filesystem::path &path) {
    if (path.empty() || !std::filesystem::exists(path)) {
        return;
    }
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 4) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        GeoLocation loc;
        loc.address_rank = static_cast<int>(parse_int(row[3]).value_or(0));
        loc.quality = quality_for_rank(loc.address_rank);
        if (loc.address_rank != 0) {
            loc.lat = row[1].empty() ? 0.0 : std::stod(row[1]);
            loc.lon = row[2].empty() ? 0.0 : std::stod(row[2]);
        }
        entries_[row[0]] = loc;
    }
}

void GeocodeCache::save(const std::filesystem::path &path) const {
    std::lock_guard<std::mutex> lock(mutex_);
    csv::Writer out(path);
    out.write({"normalized_address", "lat", "lon", "rank"});
    for (const auto &[key, loc] : entries_) {
        if (loc.address_rank == 0) {
            out.write({key, "", "", "0"});
        } else {
            out.write({key, format_coord(loc.lat), format_coord(loc.lon),
                       std::to_string(loc.address_rank)});
        }
    }
    out.close();
}

std::optional<GeoLocation> GeocodeCache::find(const std::string &key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void GeocodeCache::store(const std::string &key, const GeoLocation &loc) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_[key] = loc;
}

std::size_t GeocodeCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

std::string GeocodeCache::normalize(const StructuredAddress &address) {
    return to_lower(trim(address.region)) + "|" + to_lower(trim(address.city)) + "|" +
           to_lower(trim(address.street)) + "|" + to_lower(trim(address.house));
}

GeoLocation geocode_cascade(const StructuredAddress &address, GeocodeClient &client,
                            GeocodeCache *cache, DiagnosticSink *sink,
                            const CascadeOptions &options) {
    const std::string key = GeocodeCache::normalize(address);
    if (cache) {
        if (auto hit = cache->find(key)) {
            return *hit;
        }
    }

    std::vector<GeoQuery> steps;
    if (!address.street.empty() && !address.house.empty()) {
        steps.push_back({address.region, address.city, address.street, address.house});
    }
    if (!address.street.empty()) {
        steps.push_back({address.region, address.city, address.street, ""});
    }
    steps.push_back({address.region, address.city, "", ""});

    GeoLocation loc; // quality none until a step succeeds
    for (const auto &step : steps) {
        std::optional<GeocodeClient::Result> result;
        bool transport_failed = false;
        int delay_ms = options.retry_delay_ms;
        for (int attempt = 0;; ++attempt) {
            try {
                result = client.query(step);
                transport_failed = false;
                break;
            } catch (const ServiceUnavailable &e) {
                transport_failed = true;
                if (attempt + 1 >= options.retries) {
                    if (sink) {
                        sink->add(Severity::kError, "SERVICE_UNAVAILABLE", e.what());
                    }
                    break;
                }
                if (delay_ms > 0) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                    delay_ms *= 2;
                }
            } catch (const MalformedResponse &e) {
                if (sink) {
                    sink->add(Severity::kError, "MALFORMED_RESPONSE", e.what());
                }
                return loc; // not retryable, not cacheable
            }
        }
        if (transport_failed) {
            return loc; // transient outcome; never cached
        }
        if (result) {
            loc.lat = result->lat;
            loc.lon = result->lon;
            loc.address_rank = result->rank;
            loc.quality = quality_for_rank(result->rank);
            break;
        }
    }
    if (cache) {
        cache->store(key, loc);
    }
    return loc;
}

std::vector<GeoRow> geocode_universe(const std::vector<FirmRecord> &universe,
                                     GeocodeClient &client, GeocodeCache &cache,
                                     int max_in_flight, DiagnosticSink &sink,
                                     const CascadeOptions &options) {
    // unique addresses, sorted for determinism
    std::map<std::string, StructuredAddress> unique;
    for (const auto &record : universe) {
        unique.emplace(GeocodeCache::normalize(record.address), record.address);
    }
    std::vector<const StructuredAddress *> addresses;
    addresses.reserve(unique.size());
    for (const auto &[key, address] : unique) {
        addresses.push_back(&address);
    }

    std::vector<DiagnosticSink> sinks(addresses.size());
    parallel_chunks(addresses.size(), std::max(1, max_in_flight),
                    [&](std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                            geocode_cascade(*addresses[i], client, &cache, &sinks[i], options);
                        }
                    });
    for (const auto &s : sinks) {
        for (const auto &d : s.items()) {
            sink.add(d.severity, d.code, d.message, d.inn, d.year);
        }
    }

    std::vector<GeoRow> rows;
    rows.reserve(universe.size());
    for (const auto &record : universe) {
        GeoRow row{record.inn, record.year, {}};
        if (auto hit = cache.find(GeocodeCache::normalize(record.address))) {
            row.location = *hit;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_geo_csv(const std::filesystem::path &path, const std::vector<GeoRow> &rows) {
    csv::Writer out(path);
    out.write({"inn", "year", "lon", "lat", "address_rank", "quality"});
    for (const auto &r : rows) {
        if (r.location.quality == GeoQuality::kNone) {
            out.write({r.inn, std::to_string(r.year), "", "",
                       std::to_string(r.location.address_rank),
                       to_string(r.location.quality)});
        } else {
            out.write({r.inn, std::to_string(r.year), format_coord(r.location.lon),
                       format_coord(r.location.lat), std::to_string(r.location.address_rank),
                       to_string(r.location.quality)});
        }
    }
    out.close();
}

std::vector<GeoRow> read_geo_csv(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    std::vector<GeoRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 6) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        GeoRow r;
        r.inn = row[0];
        r.year = static_cast<int>(parse_int(row[1]).value_or(0));
        if (!row[2].empty()) {
            r.location.lon = std::stod(row[2]);
            r.location.lat = std::stod(row[3]);
        }
        r.location.address_rank = static_cast<int>(parse_int(row[4]).value_or(0));
        r.location.quality = parse_geo_quality(row[5]).value_or(GeoQuality::kNone);
        out.push_back(std::move(r));
    }
    return out;
}

std::pair<std::int64_t, std::int64_t> cell_index(double lon, double lat,
                                                 const GridConfig &config) {
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    const double x_km = config.earth_radius_km * lon * kDegToRad * std::cos(lat * kDegToRad);
    const double y_km = config.earth_radius_km * lat * kDegToRad;
    return {static_cast<std::int64_t>(std::floor(x_km / config.cell_size_km)),
            static_cast<std::int64_t>(std::floor(y_km / config.cell_size_km))};
}

std::vector<GridCell> grid_aggregate(const std::vector<PanelRow> &rows, int year,
                                     const GridConfig &config) {
    const LineCode revenue = LineCode::of("2110");
    std::map<std::pair<std::int64_t, std::int64_t>, Money> cells;
    for (const auto &row : rows) {
        if (row.firm.year != year || !row.statement || !row.geo) {
            continue;
        }
        const GeoQuality q = row.geo->quality;
        if (q != GeoQuality::kHouse && q != GeoQuality::kStreet) {
            continue;
        }
        auto rev = get_line(row.statement->lines, revenue);
        auto mat = get_line(row.statement->lines, config.materials_code);
        if (!rev || !mat || *rev <= 0 || *mat <= 0) {
            continue;
        }
        const Money value_added = *rev - *mat;
        if (value_added <= 0) {
            continue;
        }
        cells[cell_index(row.geo->lon, row.geo->lat, config)] += value_added;
    }
    std::vector<GridCell> out;
    out.reserve(cells.size());
    for (const auto &[key, value] : cells) {
        if (value != 0) {
            out.push_back({key.first, key.second, value});
        }
    }
    return out;
}

void write_grid_csv(const std::filesystem::path &path, const std::vector<GridCell> &cells,
                    double cell_size_km) {
    csv::Writer out(path);
    out.write({"cell_x", "cell_y", "cell_size_km", "value"});
    char size_buf[32];
    std::snprintf(size_buf, sizeof(size_buf), "%g", cell_size_km);
    for (const auto &cell : cells) {
        out.write({std::to_string(cell.cell_x), std::to_string(cell.cell_y), size_buf,
                   std::to_string(cell.value)});
    }
    out.close();
}

std::vector<QualityShare> quality_report(const std::vector<PanelRow> &rows) {
    const LineCode revenue = LineCode::of("2110");
    struct Sums {
        Money house_street = 0;
        Money city = 0;
        Money none = 0;
    };
    std::map<int, Sums> by_year;
    for (const auto &row : rows) {
        if (row.anomalous || !row.statement) {
            continue;
        }
        auto rev = get_line(row.statement->lines, revenue);
        if (!rev || *rev <= 0) {
            continue; // zero weight
        }
        auto &sums = by_year[row.firm.year];
        const GeoQuality q = row.geo ? row.geo->quality : GeoQuality::kNone;
        if (q == GeoQuality::kHouse || q == GeoQuality::kStreet) {
            sums.house_street += *rev;
        } else if (q == GeoQuality::kCity) {
            sums.city += *rev;
        } else {
            sums.none += *rev;
        }
    }
    std::vector<QualityShare> out;
    for (const auto &[year, sums] : by_year) {
        const Money total = sums.house_street + sums.city + sums.none;
        if (total <= 0) {
            continue;
        }
        QualityShare share;
        share.year = year;
        share.weight_total = total;
        share.share_house_street =
            static_cast<double>(sums.house_street) / static_cast<double>(total);
        share.share_city = static_cast<double>(sums.city) / static_cast<double>(total);
        share.share_none = static_cast<double>(sums.none) / static_cast<double>(total);
        out.push_back(share);
    }
    return out;
}

void write_quality_csv(const std::filesystem::path &path,
                       const std::vector<QualityShare> &shares) {
    csv::Writer out(path);
    out.write({"year", "weight_total", "share_house_street", "share_city", "share_none"});
    char buf[32];
    for (const auto &s : shares) {
        csv::Row row = {std::to_string(s.year), std::to_string(s.weight_total)};
        for (double v : {s.share_house_street, s.share_city, s.share_none}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            row.emplace_back(buf);
        }
        out.write(row);
    }
    out.close();
}

} // namespace finpanel::geo
