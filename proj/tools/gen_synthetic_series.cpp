// Writes hourly synthetic inputs for the bundled dataset: day-ahead price,
// wind and PV capacity factors. Output is a pure function of the seed.

#include "hubopt/model/dataset.hpp"
#include "hubopt/text.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace
{

using hubopt::Timestamp;
using hubopt::model::TimeSeries;

// Standard normal via Box-Muller on raw engine output, so the sequence does
// not depend on the standard library's distribution implementations.
class Normal
{
public:
    explicit Normal(std::uint64_t seed) : rng_(seed) {}

    double operator()()
    {
        if (spare_)
        {
            double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 rng_;
    std::optional<double> spare_;
};

constexpr double kLatitude = 56.6; // degrees north

double solar_elevation_sin(int day_of_year, double hour)
{
    double decl = 23.44 * std::sin(2.0 * std::numbers::pi * (284.0 + day_of_year) / 365.0);
    double lat = kLatitude * std::numbers::pi / 180.0;
    double d = decl * std::numbers::pi / 180.0;
    double hour_angle = (hour - 12.0) * 15.0 * std::numbers::pi / 180.0;
    return std::sin(lat) * std::sin(d) + std::cos(lat) * std::cos(d) * std::cos(hour_angle);
}

struct Series
{
    TimeSeries price, wind, pv;
};

Series generate(Timestamp start, int hours, std::uint64_t seed)
{
    Normal normal(seed);
    Series s;
    double wind_state = 0.0, price_noise = 0.0, cloud_state = 0.0;
    for (int h = 0; h < hours; ++h)
    {
        Timestamp t = start + std::chrono::hours{h};
        int day = h / 24;
        double hour = h % 24 + 0.5;
        double season = std::cos(2.0 * std::numbers::pi * (day - 15) / 365.0); // 1 in mid-January

        // Wind: AR(1) latent mapped through a logistic curve, windier in winter.
        wind_state = 0.97 * wind_state + 0.25 * normal();
        double cf = 1.0 / (1.0 + std::exp(-(wind_state - 0.55 + 0.45 * season)));
        cf = std::clamp(cf, 0.0, 1.0);

        // PV: clear-sky elevation times persistent cloudiness.
        cloud_state = 0.9 * cloud_state + 0.3 * normal();
        double clear = std::max(0.0, solar_elevation_sin(day + 1, hour));
        double cloud = 1.0 / (1.0 + std::exp(-(cloud_state + 0.6 - 0.4 * season)));
        double pv = std::clamp(0.85 * std::pow(clear, 1.2) * cloud, 0.0, 1.0);

        // Price: daily and seasonal shape, AR(1) noise, depressed by wind output.
        price_noise = 0.8 * price_noise + 6.0 * normal();
        double daily = 8.0 * std::sin(2.0 * std::numbers::pi * (hour - 11.0) / 24.0) +
                       6.0 * std::exp(-0.5 * std::pow((hour - 18.5) / 1.5, 2));
        double price = 42.0 + 6.0 * season + daily - 30.0 * (cf - 0.35) + price_noise;

        s.price.times.push_back(t);
        s.price.values.push_back(std::round(price * 100.0) / 100.0);
        s.wind.times.push_back(t);
        s.wind.values.push_back(std::round(cf * 10000.0) / 10000.0);
        s.pv.times.push_back(t);
        s.pv.values.push_back(std::round(pv * 10000.0) / 10000.0);
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generate synthetic hourly price and capacity-factor series"};
    std::string out_dir = "data/ts";
    std::string start_text = "2019-01-01T00:00:00";
    int hours = 8760;
    std::uint64_t seed = 2019;
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--start", start_text, "First timestamp")->capture_default_str();
    app.add_option("--hours", hours, "Number of hourly points")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    auto start = hubopt::parse_timestamp(start_text);
    if (!start)
    {
        fmt::print(stderr, "bad --start timestamp: {}\n", start_text);
        return 64;
    }
    try
    {
        auto s = generate(*start, hours, seed);
        std::filesystem::create_directories(out_dir);
        hubopt::model::write_series(s.price, std::filesystem::path(out_dir) / "el_price.csv");
        hubopt::model::write_series(s.wind, std::filesystem::path(out_dir) / "wind_cf.csv");
        hubopt::model::write_series(s.pv, std::filesystem::path(out_dir) / "pv_cf.csv");
    }
    catch (const std::exception& e)
    {
        fmt::print(stderr, "{}\n", e.what());
        return 1;
    }
    return 0;
}
