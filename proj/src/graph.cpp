#include "mstate/graph.hpp"

#include <algorithm>
#include <ostream>

#include "mstate/errors.hpp"
#include "mstate/textio.hpp"

namespace mstate {

TimeOfDay time_of_day(Timestamp t, UtcOffset offset) {
  using std::chrono::hours;
  const auto local = to_local(t, offset).since_midnight;
  if (local < hours(12)) return TimeOfDay::Morning;
  if (local < hours(14)) return TimeOfDay::Lunch;
  return TimeOfDay::Afternoon;
}

std::string_view time_of_day_name(TimeOfDay b) {
  switch (b) {
    case TimeOfDay::Morning: return "morning";
    case TimeOfDay::Lunch: return "lunch";
    case TimeOfDay::Afternoon: return "afternoon";
  }
  return "morning";
}

double edge_weight(double correlation) { return std::max(correlation, kEdgeWeightFloor); }

void write_gexf(std::ostream& out, const ClusterConfiguration& s, const CorrelationMatrix& c,
                const std::vector<Timestamp>& periods, UtcOffset offset) {
  const std::size_t n = s.size();
  if (c.rows() != n || c.cols() != n || periods.size() != n)
    throw DimensionMismatchError("configuration, correlation and periods disagree on N");

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n"
         "  <meta>\n"
         "    <creator>mstate</creator>\n"
         "    <description>temporal cluster configuration</description>\n"
         "  </meta>\n"
         "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n"
         "    <attributes class=\"node\" mode=\"static\">\n"
         "      <attribute id=\"0\" title=\"timestamp\" type=\"string\"/>\n"
         "      <attribute id=\"1\" title=\"time_of_day\" type=\"string\"/>\n"
         "      <attribute id=\"2\" title=\"cluster\" type=\"integer\"/>\n"
         "    </attributes>\n"
         "    <nodes>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const std::string ts = format_iso8601(periods[i], offset);
    out << "      <node id=\"" << i << "\" label=\"" << ts << "\">\n"
        << "        <attvalues>\n"
        << "          <attvalue for=\"0\" value=\"" << ts << "\"/>\n"
        << "          <attvalue for=\"1\" value=\"" << time_of_day_name(time_of_day(periods[i], offset))
        << "\"/>\n"
        << "          <attvalue for=\"2\" value=\"" << s[i] << "\"/>\n"
        << "        </attvalues>\n"
        << "      </node>\n";
  }
  out << "    </nodes>\n"
         "    <edges>\n";
  std::size_t edge = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (s[i] == s[j])
        out << "      <edge id=\"" << edge++ << "\" source=\"" << i << "\" target=\"" << j
            << "\" weight=\"" << format_number(edge_weight(c(i, j))) << "\"/>\n";
  out << "    </edges>\n"
         "  </graph>\n"
         "</gexf>\n";
}

}  // namespace mstate
