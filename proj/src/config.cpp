#include "ehcr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace ehcr {

namespace {

enum class Kind
{
    integer,
    unsigned_integer,
    real,
    boolean,
    word,
    real_list,
    real_or_list,
    count_or_all,
    count_or_auto,
};

struct Value
{
    bool is_list = false;
    std::vector<double> nums;
    std::string word; ///< "all", "auto", or a word-kind value
};

struct KeyDef
{
    std::string_view name;
    Kind kind;
    std::function<void(SimConfig&, const Value&)> apply;
    std::vector<std::string_view> words = {};
};

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

ConfigError bad(std::string_view key, const std::string& what) { return ConfigError(std::string(key), what); }

double parse_real(std::string_view key, std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
        throw bad(key, "expected a number, got '" + std::string(s) + "'");
    return v;
}

long long parse_integer(std::string_view key, std::string_view s)
{
    const double v = parse_real(key, s);
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw bad(key, "expected an integer, got '" + std::string(trim(s)) + "'");
    return static_cast<long long>(v);
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view s)
{
    s = trim(s);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw bad(key, "expected a non-negative integer, got '" + std::string(s) + "'");
    return v;
}

bool is_list_text(std::string_view s) { return !s.empty() && s.front() == '['; }

std::vector<std::string_view> list_items(std::string_view key, std::string_view s)
{
    s = trim(s);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw bad(key, "expected a list like [a, b]");
    std::string_view body = trim(s.substr(1, s.size() - 2));
    std::vector<std::string_view> out;
    if (body.empty())
        return out;
    while (true)
    {
        const auto comma = body.find(',');
        const auto item = trim(body.substr(0, comma));
        if (item.empty() || item.find_first_of("[]") != std::string_view::npos)
            throw bad(key, "malformed list");
        out.push_back(item);
        if (comma == std::string_view::npos)
            break;
        body = body.substr(comma + 1);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items)
{
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        if (i)
            out += ", ";
        out += items[i];
    }
    return out + "]";
}

int to_int(const Value& v) { return static_cast<int>(v.nums.at(0)); }

const std::vector<KeyDef>& key_table()
{
    static const std::vector<KeyDef> table = [] {
        std::vector<KeyDef> t;
        auto real = [&](std::string_view name, std::function<void(SimConfig&, double)> f) {
            t.push_back({name, Kind::real, [f](SimConfig& c, const Value& v) { f(c, v.nums.at(0)); }});
        };
        auto integer = [&](std::string_view name, std::function<void(SimConfig&, int)> f) {
            t.push_back({name, Kind::integer, [f](SimConfig& c, const Value& v) { f(c, to_int(v)); }});
        };
        auto per_channel = [](const Value& v, int n, std::string_view key) {
            if (!v.is_list)
                return std::vector<double>(static_cast<std::size_t>(std::max(n, 0)), v.nums.at(0));
            if (static_cast<int>(v.nums.size()) != n)
                throw bad(key, "need " + std::to_string(n) + " values, one per channel");
            return v.nums;
        };

        // channels.n first: per-channel keys broadcast against it.
        integer("channels.n", [](SimConfig& c, int n) {
            c.n_channels = n;
            c.chains.assign(static_cast<std::size_t>(std::clamp(n, 0, 64)), ChannelChain{});
            c.actions.estimate = n;
        });
        t.push_back({"channels.alpha", Kind::real_or_list, [per_channel](SimConfig& c, const Value& v) {
                         const auto a = per_channel(v, c.n_channels, "channels.alpha");
                         for (std::size_t i = 0; i < c.chains.size(); ++i)
                             c.chains[i].alpha = a[i];
                     }});
        t.push_back({"channels.beta", Kind::real_or_list, [per_channel](SimConfig& c, const Value& v) {
                         const auto b = per_channel(v, c.n_channels, "channels.beta");
                         for (std::size_t i = 0; i < c.chains.size(); ++i)
                             c.chains[i].beta = b[i];
                     }});
        t.push_back({"actions.estimate", Kind::count_or_all, [](SimConfig& c, const Value& v) {
                         c.actions.estimate = v.word == "all" ? c.n_channels : to_int(v);
                     }});
        integer("actions.sense", [](SimConfig& c, int v) { c.actions.sense = v; });
        integer("actions.access", [](SimConfig& c, int v) { c.actions.access = v; });

        real("sensing.p_col", [](SimConfig& c, double v) { c.p_col = v; });
        real("sensing.p_f", [](SimConfig& c, double v) { c.p_f = v; });
        real("sensing.snr_db", [](SimConfig& c, double v) { c.snr_db = v; });
        real("sensing.f_s_hz", [](SimConfig& c, double v) { c.f_s = v; });
        real("sensing.e_sample_j", [](SimConfig& c, double v) { c.e_s_sample = v; });
        t.push_back({"sensing.samples", Kind::count_or_auto, [](SimConfig& c, const Value& v) {
                         if (v.word == "auto")
                             c.fixed_samples.reset();
                         else
                             c.fixed_samples = static_cast<std::int64_t>(v.nums.at(0));
                     }});
        t.push_back({"sensing.channel", Kind::word,
                     [](SimConfig& c, const Value& v) { c.sensing_channel = *parse_sensing_channel(v.word); },
                     {"awgn", "rayleigh"}});

        real("power.p_b", [](SimConfig& c, double v) { c.power.p_b = v; });
        real("power.c1", [](SimConfig& c, double v) { c.power.c1 = v; });
        real("power.c2", [](SimConfig& c, double v) { c.power.c2 = v; });
        real("power.c3", [](SimConfig& c, double v) { c.power.c3 = v; });
        real("power.c4", [](SimConfig& c, double v) { c.power.c4 = v; });
        real("power.n0_w_hz", [](SimConfig& c, double v) { c.power.n0 = v; });
        real("power.bandwidth_hz", [](SimConfig& c, double v) { c.power.b = v; });
        real("power.p_ckt_w", [](SimConfig& c, double v) { c.power.p_ckt = v; });
        real("power.kappa", [](SimConfig& c, double v) { c.power.kappa = v; });
        real("power.est_fraction", [](SimConfig& c, double v) { c.est_power_fraction = v; });
        integer("power.pbar_m", [](SimConfig& c, int v) { c.pbar_constellation = v; });
        integer("power.pilot_symbols", [](SimConfig& c, int v) { c.pilot_symbols = v; });

        integer("rates.k", [](SimConfig& c, int v) { c.regions = v; });
        t.push_back({"rates.boundaries", Kind::real_list,
                     [](SimConfig& c, const Value& v) { c.boundaries = v.nums; }});

        real("slot.duration_s", [](SimConfig& c, double v) { c.slot_s = v; });

        t.push_back({"policy.name", Kind::word,
                     [](SimConfig& c, const Value& v) { c.policy = *parse_policy(v.word); },
                     {"optimal", "myopic", "belief-bandwidth", "random", "constant-rate"}});
        integer("policy.horizon", [](SimConfig& c, int v) { c.horizon = v; });
        integer("policy.constant_m", [](SimConfig& c, int v) { c.constant_m = v; });
        t.push_back({"policy.bandwidths_hz", Kind::real_list,
                     [](SimConfig& c, const Value& v) { c.bandwidths = v.nums; }});

        real("harvest.p_eh_mj_s", [](SimConfig& c, double v) { c.p_eh = v * 1e-3; });
        real("harvest.e_h_j", [](SimConfig& c, double v) { c.e_h = v; });

        real("battery.e_max_factor", [](SimConfig& c, double v) { c.e_max_factor = v; });
        real("battery.init_lo", [](SimConfig& c, double v) { c.init_lo = v; });
        real("battery.init_hi", [](SimConfig& c, double v) { c.init_hi = v; });

        t.push_back({"reward.airtime", Kind::boolean,
                     [](SimConfig& c, const Value& v) { c.airtime_reward = v.word == "true"; }});

        integer("sim.slots", [](SimConfig& c, int v) { c.slots = v; });
        integer("sim.iterations", [](SimConfig& c, int v) { c.iterations = v; });
        t.push_back({"sim.seed", Kind::unsigned_integer, [](SimConfig& c, const Value& v) {
                         c.seed = std::stoull(v.word);
                     }});
        integer("sim.threads", [](SimConfig& c, int v) { c.threads = v; });
        return t;
    }();
    return table;
}

const KeyDef& lookup_key(std::string_view key)
{
    for (const auto& d : key_table())
        if (d.name == key)
            return d;
    throw bad(key, "unknown key");
}

// Parses canonical or user text into a Value, returning the canonical text.
std::pair<Value, std::string> read_value(const KeyDef& d, std::string_view text)
{
    text = trim(text);
    const std::string_view key = d.name;
    Value v;
    auto int_text = [&](std::string_view s, long long lo, long long hi) {
        const long long x = parse_integer(key, s);
        if (x < lo || x > hi)
            throw bad(key, "value out of range");
        v.nums = {static_cast<double>(x)};
        return std::to_string(x);
    };
    switch (d.kind)
    {
    case Kind::integer:
        return {v, int_text(text, std::numeric_limits<int>::min(), std::numeric_limits<int>::max())};
    case Kind::unsigned_integer:
        v.word = std::to_string(parse_unsigned(key, text));
        return {v, v.word};
    case Kind::real:
        v.nums = {parse_real(key, text)};
        return {v, format_number(v.nums[0])};
    case Kind::boolean:
        if (text == "true" || text == "1")
            v.word = "true";
        else if (text == "false" || text == "0")
            v.word = "false";
        else
            throw bad(key, "expected true or false");
        return {v, v.word};
    case Kind::word:
        if (std::find(d.words.begin(), d.words.end(), text) == d.words.end())
        {
            std::string all;
            for (auto w : d.words)
                all += (all.empty() ? "" : ", ") + std::string(w);
            throw bad(key, "expected one of " + all);
        }
        v.word = std::string(text);
        return {v, v.word};
    case Kind::count_or_all:
    case Kind::count_or_auto:
    {
        const std::string_view special = d.kind == Kind::count_or_all ? "all" : "auto";
        if (text == special)
        {
            v.word = std::string(special);
            return {v, v.word};
        }
        return {v, int_text(text, 0, std::numeric_limits<int>::max())};
    }
    case Kind::real_list:
    case Kind::real_or_list:
        if (d.kind == Kind::real_or_list && !is_list_text(text))
        {
            v.nums = {parse_real(key, text)};
            return {v, format_number(v.nums[0])};
        }
        {
            v.is_list = true;
            std::vector<std::string> items;
            for (auto item : list_items(key, text))
            {
                v.nums.push_back(parse_real(key, item));
                items.push_back(format_number(v.nums.back()));
            }
            return {v, join_list(items)};
        }
    }
    throw bad(key, "unsupported value");
}

constexpr std::string_view sweep_prefix = "sweep.";

}  // namespace

std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& d : key_table())
            k.emplace_back(d.name);
        return k;
    }();
    return keys;
}

std::string canonical_value(std::string_view key, std::string_view value)
{
    return read_value(lookup_key(key), value).second;
}

void SweepSpec::set(std::string_view key, std::string_view value)
{
    key = trim(key);
    if (key.substr(0, sweep_prefix.size()) == sweep_prefix)
    {
        const std::string_view sub = key.substr(sweep_prefix.size());
        const KeyDef& d = lookup_key(sub);
        if (d.kind == Kind::real_list || d.kind == Kind::real_or_list)
            throw bad(key, "list-valued keys cannot be swept");
        SweepAxis axis{std::string(sub), {}};
        for (auto item : list_items(key, value))
            axis.values.push_back(read_value(d, item).second);
        if (axis.values.empty())
            throw bad(key, "sweep value list must not be empty");
        auto it = std::find_if(axes.begin(), axes.end(), [&](const SweepAxis& a) { return a.key == sub; });
        if (it != axes.end())
            *it = std::move(axis);
        else
            axes.push_back(std::move(axis));
        return;
    }
    const std::string canon = canonical_value(key, value);
    auto it = std::find_if(settings.begin(), settings.end(), [&](const auto& kv) { return kv.first == key; });
    if (it != settings.end())
        it->second = canon;
    else
        settings.emplace_back(std::string(key), canon);
    std::erase_if(axes, [&](const SweepAxis& a) { return a.key == key; });
}

const std::string* SweepSpec::find(std::string_view key) const
{
    for (const auto& [k, v] : settings)
        if (k == key)
            return &v;
    return nullptr;
}

std::size_t SweepSpec::grid_size() const
{
    std::size_t n = 1;
    for (const auto& a : axes)
        n *= a.values.size();
    return n;
}

std::vector<std::string> SweepSpec::point(std::size_t index) const
{
    if (index >= grid_size())
        throw std::out_of_range("sweep point index out of range");
    std::vector<std::string> p(axes.size());
    for (std::size_t i = axes.size(); i-- > 0;)
    {
        p[i] = axes[i].values[index % axes[i].values.size()];
        index /= axes[i].values.size();
    }
    return p;
}

SimConfig SweepSpec::materialize(const std::vector<std::string>& point) const
{
    if (point.size() != axes.size())
        throw std::invalid_argument("sweep point does not match the axes");
    std::map<std::string_view, std::string_view> effective;
    for (const auto& [k, v] : settings)
        effective[k] = v;
    for (std::size_t i = 0; i < axes.size(); ++i)
        effective[axes[i].key] = point[i];

    SimConfig cfg;
    for (const auto& d : key_table())
        if (auto it = effective.find(d.name); it != effective.end())
            d.apply(cfg, read_value(d, it->second).first);
    cfg.validate();
    return cfg;
}

SweepSpec parse_sweep(std::string_view text)
{
    SweepSpec spec;
    std::size_t line_no = 0;
    while (!text.empty())
    {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("", "line " + std::to_string(line_no) + ": missing key");
        spec.set(key, trim(line.substr(eq + 1)));
    }
    return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("error reading " + path.string());
    return parse_sweep(ss.str());
}

std::string serialize(const SweepSpec& spec)
{
    std::string out;
    for (const auto& [k, v] : spec.settings)
        out += k + " = " + v + "\n";
    for (const auto& a : spec.axes)
        out += std::string(sweep_prefix) + a.key + " = " + join_list(a.values) + "\n";
    return out;
}

SimConfig parse_config(std::string_view text)
{
    const SweepSpec spec = parse_sweep(text);
    if (!spec.axes.empty())
        throw ConfigError("sweep." + spec.axes.front().key, "a single configuration cannot sweep");
    return spec.materialize({});
}

}  // namespace ehcr
