#pragma once

#include "finpanel/diagnostics.hpp"
#include "finpanel/types.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace finpanel::geo {

struct ServiceUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedResponse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One structured query against the service. Field emptiness encodes the
/// cascade step (house dropped first, then street).
struct GeoQuery {
    std::string region;
    std::string city;
    std::string street;
    std::string house;
};

class GeocodeClient {
  public:
    struct Result {
        double lat = 0.0;
        double lon = 0.0;
        int rank = 0;
    };

    virtual ~GeocodeClient() = default;

    /// nullopt is a definitive no-result. Throws ServiceUnavailable on
    /// transport failures and MalformedResponse on undecodable payloads.
    virtual std::optional<Result> query(const GeoQuery &q) = 0;
};

/// Talks to a Nominatim-style structured search endpoint:
/// GET {base}/search?format=jsonv2&region=..&city=..&street=..&house=..
/// expecting a JSON array whose first element carries lat, lon and
/// address_rank (place_rank accepted as an alias).
class HttpGeocodeClient : public GeocodeClient {
  public:
    explicit HttpGeocodeClient(std::string base_url);
    ~HttpGeocodeClient() override;

    std::optional<Result> query(const GeoQuery &q) override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// On-disk query cache: normalized_address,lat,lon,rank per line. A rank of
/// 0 records a definitive no-result. Thread safe.
class GeocodeCache {
  public:
    GeocodeCache() = default;
    explicit GeocodeCache(const std::filesystem::path &path); // absent file = empty
    void save(const std::filesystem::path &path) const;

    std::optional<GeoLocation> find(const std::string &key) const;
    void store(const std::string &key, const GeoLocation &loc);
    std::size_t size() const;

    static std::string normalize(const StructuredAddress &address);

  private:
    mutable std::mutex mutex_;
    std::map<std::string, GeoLocation> entries_;
};

struct CascadeOptions {
    int retries = 3;
    int retry_delay_ms = 50; // doubled per attempt
};

/// Three-step fallback: {region, city, street, house}, then without the
/// house, then region and city only; a step that succeeds stops the
/// cascade. Results (including definitive no-results) are cached by
/// normalized address; transport failures after bounded retries yield
/// quality none with a diagnostic and are not cached.
GeoLocation geocode_cascade(const StructuredAddress &address, GeocodeClient &client,
                            GeocodeCache *cache, DiagnosticSink *sink,
                            const CascadeOptions &options = {});

struct GeoRow {
    std::string inn;
    int year = 0;
    GeoLocation location;
};

/// Geocodes every unique address in the universe with at most max_in_flight
/// concurrent requests, then maps firm-years onto the results.
std::vector<GeoRow> geocode_universe(const std::vector<FirmRecord> &universe,
                                     GeocodeClient &client, GeocodeCache &cache,
                                     int max_in_flight, DiagnosticSink &sink,
                                     const CascadeOptions &options = {});

void write_geo_csv(const std::filesystem::path &path, const std::vector<GeoRow> &rows);
std::vector<GeoRow> read_geo_csv(const std::filesystem::path &path);

struct GridConfig {
    double cell_size_km = 1.0;
    double earth_radius_km = 6371.0088; // sinusoidal equal-area projection
    LineCode materials_code = LineCode::of("4121");
};

struct GridCell {
    std::int64_t cell_x = 0;
    std::int64_t cell_y = 0;
    Money value = 0; // thousands of rubles
};

std::pair<std::int64_t, std::int64_t> cell_index(double lon, double lat,
                                                 const GridConfig &config);

/// Firm value added (revenue minus materials, both present and positive,
/// difference positive) summed onto the grid for firms located to house or
/// street precision. City-level placements would fabricate spatial
/// precision and contribute nothing. Cells with zero total are omitted;
/// output sorted by (cell_x, cell_y).
std::vector<GridCell> grid_aggregate(const std::vector<PanelRow> &rows, int year,
                                     const GridConfig &config);

void write_grid_csv(const std::filesystem::path &path, const std::vector<GridCell> &cells,
                    double cell_size_km);

struct QualityShare {
    int year = 0;
    Money weight_total = 0; // summed revenue weights
    double share_house_street = 0.0;
    double share_city = 0.0;
    double share_none = 0.0;
};

/// Revenue-weighted shares by geocoding tier per year; zero/missing revenue
/// weighs nothing, anomalous rows are excluded. Years with zero total
/// weight are omitted.
std::vector<QualityShare> quality_report(const std::vector<PanelRow> &rows);

void write_quality_csv(const std::filesystem::path &path,
                       const std::vector<QualityShare> &shares);

} // namespace finpanel::geo
