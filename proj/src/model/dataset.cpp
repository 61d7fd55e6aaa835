#include "hubopt/model/dataset.hpp"

#include "hubopt/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace hubopt::model
{

namespace
{

constexpr std::string_view kHeader = "class,entity,parameter,scenario,time,value";
constexpr std::string_view kSeriesPrefix = "ts:";

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Parameters that describe structure rather than scenario-dependent data.
bool is_structural(EntityClass cls, std::string_view parameter)
{
    return (cls == EntityClass::Group && parameter == "member") ||
           (cls == EntityClass::Scenario &&
            (parameter == "combine_with" || parameter == "place_before"));
}

struct TimedPoints
{
    std::vector<std::pair<Timestamp, double>> points;
    std::string where;
};

class Loader
{
public:
    Loader(std::filesystem::path ts_dir, std::string source)
        : ts_dir_(std::move(ts_dir)), source_(std::move(source))
    {
    }

    void read(std::istream& in)
    {
        std::string line;
        bool header_seen = false;
        while (std::getline(in, line))
        {
            ++line_no_;
            auto t = trim(line);
            if (t.empty() || t.front() == '#')
                continue;
            if (!header_seen)
            {
                auto fields = parse_csv_line(t);
                std::string joined;
                for (std::size_t i = 0; i < fields.size(); ++i)
                    joined += (i ? "," : "") + std::string(trim(fields[i]));
                if (joined != kHeader)
                    fail(ErrorCode::ParseError, "expected header '" + std::string(kHeader) + "'");
                header_seen = true;
                continue;
            }
            row(parse_csv_line(line));
        }
    }

    EntityGraph finish()
    {
        for (auto& [key, timed] : timed_)
        {
            auto& [ref, parameter, layer] = key;
            auto& pts = timed.points;
            std::sort(pts.begin(), pts.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t i = 1; i < pts.size(); ++i)
                if (pts[i].first == pts[i - 1].first)
                    throw Error(ErrorCode::DuplicateParameter,
                                timed.where + ": " + to_string(ref) + " " + parameter + " [" +
                                    layer + "] repeats timestamp " +
                                    format_timestamp(pts[i].first));
            TimeSeries ts;
            for (auto& [time, value] : pts)
            {
                ts.times.push_back(time);
                ts.values.push_back(value);
            }
            store(ref, parameter, layer, Value{std::move(ts)}, timed.where);
        }
        link();
        for (auto& [name, info] : graph_.layers)
        {
            std::sort(info.combine_with.begin(), info.combine_with.end());
            std::sort(info.place_before.begin(), info.place_before.end());
        }
        for (auto& [name, group] : graph_.groups)
            std::sort(group.members.begin(), group.members.end());
        return std::move(graph_);
    }

private:
    [[noreturn]] void fail(ErrorCode code, const std::string& message) const
    {
        throw Error(code, where() + ": " + message);
    }

    std::string where() const { return source_ + ":" + std::to_string(line_no_); }

    void row(std::vector<std::string> fields)
    {
        if (fields.size() != 6)
            fail(ErrorCode::ParseError,
                 "expected 6 fields, found " + std::to_string(fields.size()));
        for (auto& f : fields)
            f = std::string(trim(f));
        const auto& [cls_text, entity, parameter, layer, time, value] =
            std::tie(fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]);
        auto cls = parse_class(cls_text);
        if (!cls)
            fail(ErrorCode::ParseError, "unknown class '" + cls_text + "'");
        if (entity.empty())
            fail(ErrorCode::ParseError, "empty entity name");

        EntityRef ref = declare(*cls, entity);
        if (!layer.empty())
            declare_layer(layer);
        if (parameter.empty())
            return;

        if (is_structural(*cls, parameter))
        {
            if (value.empty())
                fail(ErrorCode::ParseError, parameter + " needs a value");
            if (*cls == EntityClass::Group)
            {
                auto& members = graph_.groups[entity].members;
                if (std::find(members.begin(), members.end(), value) != members.end())
                    fail(ErrorCode::DuplicateParameter,
                         "group " + entity + " lists member " + value + " twice");
                members.push_back(value);
            }
            else
            {
                declare_layer(entity);
                declare_layer(value);
                auto& info = graph_.layers[entity];
                (parameter == "combine_with" ? info.combine_with : info.place_before)
                    .push_back(value);
            }
            return;
        }

        if (layer.empty())
            fail(ErrorCode::ParseError, "parameter " + parameter + " has no scenario layer");
        if (*cls == EntityClass::Scenario)
            fail(ErrorCode::ParseError, "unknown scenario setting '" + parameter + "'");

        if (!time.empty())
        {
            auto ts = parse_timestamp(time);
            if (!ts)
                fail(ErrorCode::ParseError, "bad timestamp '" + time + "'");
            auto v = parse_number(value);
            if (!v)
                fail(ErrorCode::ParseError, "timed value must be numeric, got '" + value + "'");
            auto key = std::make_tuple(ref, parameter, layer);
            auto& timed = timed_[key];
            if (timed.where.empty())
                timed.where = where();
            timed.points.emplace_back(*ts, *v);
            return;
        }
        store(ref, parameter, layer, parse_value(value), where());
    }

    EntityRef declare(EntityClass cls, const std::string& entity)
    {
        EntityRef ref{cls, entity};
        switch (cls)
        {
        case EntityClass::Unit:
            graph_.units.try_emplace(entity, Unit{entity, {}});
            break;
        case EntityClass::Node:
            graph_.nodes.try_emplace(entity, Node{entity, {}});
            break;
        case EntityClass::Group:
            graph_.groups.try_emplace(entity, Group{entity, {}, {}});
            break;
        case EntityClass::UserConstraint:
            graph_.user_constraints.try_emplace(entity, UserConstraint{entity, {}});
            break;
        case EntityClass::Model:
        case EntityClass::TemporalBlock:
            graph_.settings.try_emplace(ref, SettingsObject{cls, entity, {}});
            break;
        case EntityClass::Scenario:
            declare_layer(entity);
            break;
        case EntityClass::UserConstraintUnit: {
            auto parts = split(entity, '|');
            if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
                fail(ErrorCode::ParseError, "user_constraint__unit entity must be 'constraint|unit'");
            graph_.user_constraint_members.try_emplace(
                ref, UserConstraintMember{parts[0], parts[1], {}});
            break;
        }
        case EntityClass::UnitFromNode:
        case EntityClass::UnitToNode:
        case EntityClass::UnitNodeNode: {
            auto parts = split(entity, '|');
            bool ok = cls == EntityClass::UnitNodeNode ? (parts.size() == 2 || parts.size() == 3)
                                                       : parts.size() == 2;
            if (!ok || std::any_of(parts.begin(), parts.end(), [](auto& p) { return p.empty(); }))
                fail(ErrorCode::ParseError, "malformed relationship entity '" + entity + "'");
            Relationship rel;
            rel.kind = cls == EntityClass::UnitFromNode ? RelationshipKind::UnitFromNode
                       : cls == EntityClass::UnitToNode ? RelationshipKind::UnitToNode
                                                        : RelationshipKind::UnitNodeNode;
            rel.unit = parts[0];
            rel.node1 = parts[1];
            if (parts.size() == 3)
                rel.node2 = parts[2];
            graph_.relationships.try_emplace(ref, std::move(rel));
            break;
        }
        }
        return ref;
    }

    void declare_layer(const std::string& name)
    {
        graph_.layers.try_emplace(name, LayerInfo{name, {}, {}});
    }

    Value parse_value(const std::string& text)
    {
        if (text.starts_with(kSeriesPrefix))
        {
            std::string file = text.substr(kSeriesPrefix.size());
            if (file.empty())
                fail(ErrorCode::ParseError, "empty time-series reference");
            auto it = series_cache_.find(file);
            if (it == series_cache_.end())
            {
                TimeSeries ts = load_series(ts_dir_ / file);
                ts.source = file;
                it = series_cache_.emplace(file, std::move(ts)).first;
            }
            return it->second;
        }
        if (auto v = parse_number(text))
            return *v;
        auto l = lower(text);
        if (l == "true")
            return true;
        if (l == "false")
            return false;
        if (text.empty())
            fail(ErrorCode::ParseError, "empty value");
        return text;
    }

    void store(const EntityRef& ref, const std::string& parameter, const std::string& layer,
               Value value, const std::string& at)
    {
        ParameterMap* params = mutable_parameters(ref);
        auto& values = (*params)[parameter];
        auto pos = std::lower_bound(values.begin(), values.end(), layer,
                                    [](const ParameterValue& pv, const std::string& l) {
                                        return pv.layer < l;
                                    });
        if (pos != values.end() && pos->layer == layer)
            throw Error(ErrorCode::DuplicateParameter, at + ": " + to_string(ref) + " " +
                                                           parameter + " set twice in layer " +
                                                           layer);
        values.insert(pos, ParameterValue{std::move(value), layer});
    }

    ParameterMap* mutable_parameters(const EntityRef& ref)
    {
        switch (ref.cls)
        {
        case EntityClass::Unit: return &graph_.units.at(ref.name).parameters;
        case EntityClass::Node: return &graph_.nodes.at(ref.name).parameters;
        case EntityClass::Group: return &graph_.groups.at(ref.name).parameters;
        case EntityClass::UserConstraint: return &graph_.user_constraints.at(ref.name).parameters;
        case EntityClass::UserConstraintUnit:
            return &graph_.user_constraint_members.at(ref).parameters;
        case EntityClass::UnitFromNode:
        case EntityClass::UnitToNode:
        case EntityClass::UnitNodeNode: return &graph_.relationships.at(ref).parameters;
        case EntityClass::Model:
        case EntityClass::TemporalBlock: return &graph_.settings.at(ref).parameters;
        case EntityClass::Scenario: break;
        }
        throw Error(ErrorCode::ParseError, "scenario entries carry no parameters");
    }

    void link() const
    {
        auto need_node_or_group = [&](const std::string& name, const EntityRef& by) {
            if (!graph_.is_node(name) && !graph_.is_group(name))
                throw Error(ErrorCode::UnknownEntity,
                            to_string(by) + " references undeclared node or group '" + name + "'");
        };
        for (const auto& [ref, rel] : graph_.relationships)
        {
            if (!graph_.units.contains(rel.unit))
                throw Error(ErrorCode::UnknownEntity,
                            to_string(ref) + " references undeclared unit '" + rel.unit + "'");
            need_node_or_group(rel.node1, ref);
            if (rel.node2)
                need_node_or_group(*rel.node2, ref);
        }
        for (const auto& [name, group] : graph_.groups)
            for (const auto& member : group.members)
                if (!graph_.is_node(member))
                    throw Error(ErrorCode::UnknownEntity,
                                "group " + name + " member '" + member + "' is not a declared node");
        for (const auto& [ref, member] : graph_.user_constraint_members)
        {
            if (!graph_.user_constraints.contains(member.constraint))
                throw Error(ErrorCode::UnknownEntity,
                            to_string(ref) + " references undeclared user_constraint '" +
                                member.constraint + "'");
            if (!graph_.units.contains(member.unit))
                throw Error(ErrorCode::UnknownEntity,
                            to_string(ref) + " references undeclared unit '" + member.unit + "'");
        }
    }

    std::filesystem::path ts_dir_;
    std::string source_;
    std::size_t line_no_ = 0;
    EntityGraph graph_;
    std::map<std::string, TimeSeries> series_cache_;
    std::map<std::tuple<EntityRef, std::string, std::string>, TimedPoints> timed_;
};

std::string value_text(const Value& value)
{
    if (auto* ts = std::get_if<TimeSeries>(&value))
        return std::string(kSeriesPrefix) + ts->source;
    return describe(value);
}

void write_parameters(std::ostream& out, const EntityRef& ref, const ParameterMap& params,
                      const std::filesystem::path& ts_dir, std::set<std::string>& written)
{
    auto cls = class_name(ref.cls);
    for (const auto& [parameter, values] : params)
    {
        for (const auto& pv : values)
        {
            const auto* ts = std::get_if<TimeSeries>(&pv.value);
            if (ts && ts->source.empty())
            {
                for (std::size_t i = 0; i < ts->times.size(); ++i)
                    out << cls << ',' << csv_escape(ref.name) << ',' << csv_escape(parameter)
                        << ',' << csv_escape(pv.layer) << ',' << format_timestamp(ts->times[i])
                        << ',' << format_number(ts->values[i]) << '\n';
                continue;
            }
            if (ts && written.insert(ts->source).second)
                write_series(*ts, ts_dir / ts->source);
            out << cls << ',' << csv_escape(ref.name) << ',' << csv_escape(parameter) << ','
                << csv_escape(pv.layer) << ",," << csv_escape(value_text(pv.value)) << '\n';
        }
    }
}

} // namespace

TimeSeries load_series(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open time series " + path.string());
    TimeSeries ts;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line))
    {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto fields = parse_csv_line(t);
        if (!header_seen)
        {
            header_seen = true;
            if (fields.size() == 2 && trim(fields[0]) == "timestamp" && trim(fields[1]) == "value")
                continue;
            throw Error(ErrorCode::MalformedSeries,
                        path.string() + ": expected header 'timestamp,value'");
        }
        auto where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 2)
            throw Error(ErrorCode::MalformedSeries, where + ": expected 2 fields");
        auto time = parse_timestamp(fields[0]);
        auto value = parse_number(fields[1]);
        if (!time || !value)
            throw Error(ErrorCode::MalformedSeries, where + ": unparsable row");
        if (!ts.times.empty() && *time <= ts.times.back())
            throw Error(ErrorCode::MalformedSeries, where + ": timestamps must strictly increase");
        ts.times.push_back(*time);
        ts.values.push_back(*value);
    }
    if (ts.times.empty())
        throw Error(ErrorCode::MalformedSeries, path.string() + ": no data rows");
    return ts;
}

void write_series(const TimeSeries& series, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << "timestamp,value\n";
    for (std::size_t i = 0; i < series.times.size(); ++i)
        out << format_timestamp(series.times[i]) << ',' << format_number(series.values[i]) << '\n';
}

EntityGraph parse_dataset(std::istream& in, const std::filesystem::path& timeseries_dir,
                          std::string_view source_name)
{
    Loader loader(timeseries_dir, std::string(source_name));
    loader.read(in);
    return loader.finish();
}

EntityGraph load_dataset(const std::filesystem::path& model_file,
                         const std::filesystem::path& timeseries_dir)
{
    std::ifstream in(model_file);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open model file " + model_file.string());
    return parse_dataset(in, timeseries_dir, model_file.filename().string());
}

void write_dataset(const EntityGraph& graph, const std::filesystem::path& model_file,
                   const std::filesystem::path& timeseries_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(timeseries_dir, ec);
    std::ofstream out(model_file, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + model_file.string());
    std::set<std::string> written;
    out << kHeader << '\n';

    for (const auto& [name, info] : graph.layers)
    {
        out << "scenario," << csv_escape(name) << ",,,,\n";
        for (const auto& other : info.combine_with)
            out << "scenario," << csv_escape(name) << ",combine_with,,," << csv_escape(other) << '\n';
        for (const auto& other : info.place_before)
            out << "scenario," << csv_escape(name) << ",place_before,,," << csv_escape(other) << '\n';
    }
    auto declare = [&](const EntityRef& ref) {
        out << class_name(ref.cls) << ',' << csv_escape(ref.name) << ",,,,\n";
    };
    for (const auto& [ref, obj] : graph.settings)
    {
        declare(ref);
        write_parameters(out, ref, obj.parameters, timeseries_dir, written);
    }
    for (const auto& [name, unit] : graph.units)
    {
        EntityRef ref{EntityClass::Unit, name};
        declare(ref);
        write_parameters(out, ref, unit.parameters, timeseries_dir, written);
    }
    for (const auto& [name, node] : graph.nodes)
    {
        EntityRef ref{EntityClass::Node, name};
        declare(ref);
        write_parameters(out, ref, node.parameters, timeseries_dir, written);
    }
    for (const auto& [name, group] : graph.groups)
    {
        EntityRef ref{EntityClass::Group, name};
        declare(ref);
        for (const auto& member : group.members)
            out << "group," << csv_escape(name) << ",member,,," << csv_escape(member) << '\n';
        write_parameters(out, ref, group.parameters, timeseries_dir, written);
    }
    for (const auto& [ref, rel] : graph.relationships)
    {
        declare(ref);
        write_parameters(out, ref, rel.parameters, timeseries_dir, written);
    }
    for (const auto& [name, uc] : graph.user_constraints)
    {
        EntityRef ref{EntityClass::UserConstraint, name};
        declare(ref);
        write_parameters(out, ref, uc.parameters, timeseries_dir, written);
    }
    for (const auto& [ref, member] : graph.user_constraint_members)
    {
        declare(ref);
        write_parameters(out, ref, member.parameters, timeseries_dir, written);
    }
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed for " + model_file.string());
}

const ParameterValue* select_layer(const std::vector<ParameterValue>& values,
                                   std::span<const std::string> stack)
{
    for (auto layer = stack.rbegin(); layer != stack.rend(); ++layer)
        for (const auto& pv : values)
            if (pv.layer == *layer)
                return &pv;
    return nullptr;
}

Resolved resolve(const EntityGraph& graph, const EntityRef& entity, std::string_view parameter,
                 std::span<const std::string> stack, Timestamp t)
{
    for (const auto& layer : stack)
        if (!graph.layers.contains(layer))
            throw Error(ErrorCode::UndeclaredLayer, "layer '" + layer + "' is not declared");
    const ParameterMap* params = graph.parameters(entity);
    if (!params)
        throw Error(ErrorCode::Unresolved, "unknown entity " + to_string(entity));
    auto it = params->find(parameter);
    const ParameterValue* pv = it == params->end() ? nullptr : select_layer(it->second, stack);
    if (!pv)
        throw Error(ErrorCode::Unresolved, to_string(entity) + " " + std::string(parameter) +
                                               " is not defined by any active layer");
    if (const auto* ts = std::get_if<TimeSeries>(&pv->value))
    {
        auto v = ts->sample(t);
        if (!v)
            throw Error(ErrorCode::Unresolved, to_string(entity) + " " + std::string(parameter) +
                                                   " has no value at " + format_timestamp(t));
        return *v;
    }
    if (const auto* d = std::get_if<double>(&pv->value))
        return *d;
    if (const auto* b = std::get_if<bool>(&pv->value))
        return *b;
    return std::get<std::string>(pv->value);
}

} // namespace hubopt::model
