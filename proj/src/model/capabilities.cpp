#include "wmsmon/model/capabilities.hpp"

#include <expat.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wmsmon/core/url.hpp"
#include "wmsmon/model/publisher.hpp"

namespace wmsmon {

namespace {

struct XmlNode {
  std::string qname;
  std::string name;  // local part of qname
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;
  std::vector<std::unique_ptr<XmlNode>> children;

  const XmlNode* child(std::string_view local) const {
    for (const auto& c : children) {
      if (iequals(c->name, local)) return c.get();
    }
    return nullptr;
  }

  std::vector<const XmlNode*> all(std::string_view local) const {
    std::vector<const XmlNode*> out;
    for (const auto& c : children) {
      if (iequals(c->name, local)) out.push_back(c.get());
    }
    return out;
  }

  std::optional<std::string> attr(std::string_view local) const {
    for (const auto& [k, v] : attrs) {
      const auto colon = k.find(':');
      const std::string_view key = colon == std::string::npos
                                       ? std::string_view(k)
                                       : std::string_view(k).substr(colon + 1);
      if (iequals(key, local)) return v;
    }
    return std::nullopt;
  }
};

std::string local_name(std::string_view qname) {
  const auto colon = qname.rfind(':');
  return std::string(colon == std::string_view::npos ? qname : qname.substr(colon + 1));
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string child_text(const XmlNode* node, std::string_view local) {
  if (node == nullptr) return {};
  const auto* c = node->child(local);
  return c ? trim(c->text) : std::string{};
}

// --- Expat driver ---------------------------------------------------------

struct BuildState {
  std::unique_ptr<XmlNode> root;
  std::vector<XmlNode*> stack;
  std::vector<std::string> comments;
  bool stop_at_root = false;
  XML_Parser parser = nullptr;
};

void XMLCALL on_start(void* data, const XML_Char* qname, const XML_Char** atts) {
  auto* st = static_cast<BuildState*>(data);
  auto node = std::make_unique<XmlNode>();
  node->qname = qname;
  node->name = local_name(qname);
  for (int i = 0; atts[i] != nullptr; i += 2) node->attrs.emplace_back(atts[i], atts[i + 1]);
  XmlNode* raw = node.get();
  if (st->stack.empty()) {
    st->root = std::move(node);
    if (st->stop_at_root) {
      XML_StopParser(st->parser, XML_FALSE);
      return;
    }
  } else {
    st->stack.back()->children.push_back(std::move(node));
  }
  st->stack.push_back(raw);
}

void XMLCALL on_end(void* data, const XML_Char*) {
  auto* st = static_cast<BuildState*>(data);
  if (!st->stack.empty()) st->stack.pop_back();
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
  auto* st = static_cast<BuildState*>(data);
  if (!st->stack.empty()) st->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

void XMLCALL on_comment(void* data, const XML_Char* s) {
  static_cast<BuildState*>(data)->comments.emplace_back(s);
}

// windows-1252 is common on older servers and unknown to expat.
constexpr std::array<int, 32> kCp1252High{
    0x20AC, -1,     0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, -1,     0x017D, -1,     -1,     0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, -1,     0x017E, 0x0178};

int XMLCALL on_unknown_encoding(void*, const XML_Char* name, XML_Encoding* info) {
  const std::string n = to_lower(name);
  if (n != "windows-1252" && n != "cp1252") return XML_STATUS_ERROR;
  for (int i = 0; i < 256; ++i) info->map[i] = i;
  for (int i = 0; i < 32; ++i) info->map[0x80 + i] = kCp1252High[static_cast<std::size_t>(i)];
  info->data = nullptr;
  info->convert = nullptr;
  info->release = nullptr;
  return XML_STATUS_OK;
}

struct ParseAttempt {
  BuildState state;
  XML_Error error = XML_ERROR_NONE;
};

std::unique_ptr<ParseAttempt> run_expat(std::string_view xml, const char* forced_encoding,
                                        bool stop_at_root) {
  auto attempt = std::make_unique<ParseAttempt>();
  XML_Parser p = XML_ParserCreate(forced_encoding);
  attempt->state.parser = p;
  attempt->state.stop_at_root = stop_at_root;
  XML_SetUserData(p, &attempt->state);
  XML_SetElementHandler(p, on_start, on_end);
  XML_SetCharacterDataHandler(p, on_text);
  XML_SetCommentHandler(p, on_comment);
  XML_SetUnknownEncodingHandler(p, on_unknown_encoding, nullptr);
  const auto status = XML_Parse(p, xml.data(), static_cast<int>(xml.size()), XML_TRUE);
  if (status == XML_STATUS_ERROR) attempt->error = XML_GetErrorCode(p);
  XML_ParserFree(p);
  return attempt;
}

bool is_encoding_error(XML_Error e) {
  return e == XML_ERROR_UNKNOWN_ENCODING || e == XML_ERROR_INCORRECT_ENCODING ||
         e == XML_ERROR_INVALID_TOKEN || e == XML_ERROR_PARTIAL_CHAR;
}

std::unique_ptr<ParseAttempt> parse_xml(std::string_view xml, bool stop_at_root) {
  auto attempt = run_expat(xml, nullptr, stop_at_root);
  for (const char* fallback : {"UTF-8", "ISO-8859-1"}) {
    if (attempt->error == XML_ERROR_NONE || !is_encoding_error(attempt->error)) break;
    attempt = run_expat(xml, fallback, stop_at_root);
  }
  return attempt;
}

// --- WMS extraction -------------------------------------------------------

std::optional<double> to_double(std::optional<std::string> s) {
  if (!s) return std::nullopt;
  const std::string t = trim(*s);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return v;
}

// Servers often print extents like -180.0000001; snap those onto the range.
std::optional<GeoBBox> make_bbox(std::optional<double> w, std::optional<double> s,
                                 std::optional<double> e, std::optional<double> n) {
  if (!w || !s || !e || !n) return std::nullopt;
  auto snap = [](double v, double limit) {
    constexpr double kSlack = 1e-6;
    if (v > limit && v <= limit + kSlack) return limit;
    if (v < -limit && v >= -limit - kSlack) return -limit;
    return v;
  };
  GeoBBox box{snap(*w, 180), snap(*s, 90), snap(*e, 180), snap(*n, 90)};
  if (!box.valid()) return std::nullopt;
  return box;
}

std::optional<GeoBBox> read_geographic_bbox(const XmlNode& layer) {
  if (const auto* ex = layer.child("EX_GeographicBoundingBox")) {
    auto num = [&](std::string_view tag) -> std::optional<double> {
      const auto* c = ex->child(tag);
      return c ? to_double(c->text) : std::nullopt;
    };
    return make_bbox(num("westBoundLongitude"), num("southBoundLatitude"),
                     num("eastBoundLongitude"), num("northBoundLatitude"));
  }
  if (const auto* ll = layer.child("LatLonBoundingBox")) {
    return make_bbox(to_double(ll->attr("minx")), to_double(ll->attr("miny")),
                     to_double(ll->attr("maxx")), to_double(ll->attr("maxy")));
  }
  return std::nullopt;
}

std::vector<std::string> read_keywords(const XmlNode* node) {
  std::vector<std::string> out;
  if (node == nullptr) return out;
  if (const auto* list = node->child("KeywordList")) {
    for (const auto* kw : list->all("Keyword")) {
      auto t = trim(kw->text);
      if (!t.empty()) out.push_back(std::move(t));
    }
  }
  if (const auto* legacy = node->child("Keywords")) {
    for (auto& tok : split_ws(legacy->text)) out.push_back(std::move(tok));
  }
  return out;
}

std::optional<std::string> read_time_dimension(const XmlNode& layer) {
  for (const char* tag : {"Extent", "Dimension"}) {
    for (const auto* d : layer.all(tag)) {
      const auto name = d->attr("name");
      if (!name || !iequals(trim(*name), "time")) continue;
      auto value = trim(d->text);
      if (!value.empty()) return value;
    }
  }
  return std::nullopt;
}

LayerRecord read_layer(const XmlNode& node, const std::vector<std::string>& inherited_crs,
                       const std::optional<GeoBBox>& inherited_bbox, bool v130) {
  LayerRecord layer;
  if (auto name = child_text(&node, "Name"); !name.empty()) layer.name = std::move(name);
  layer.title = child_text(&node, "Title");
  layer.abstract_text = child_text(&node, "Abstract");
  layer.keywords = read_keywords(&node);

  for (const auto* c : node.all(v130 ? "CRS" : "SRS")) {
    for (auto& tok : split_ws(c->text)) {
      if (std::find(layer.crs_list.begin(), layer.crs_list.end(), tok) == layer.crs_list.end()) {
        layer.crs_list.push_back(std::move(tok));
      }
    }
  }
  for (const auto& crs : inherited_crs) {
    if (std::find(layer.crs_list.begin(), layer.crs_list.end(), crs) == layer.crs_list.end()) {
      layer.crs_list.push_back(crs);
    }
  }

  layer.geographic_bbox = read_geographic_bbox(node);
  if (!layer.geographic_bbox) layer.geographic_bbox = inherited_bbox;

  for (const auto* bb : node.all("BoundingBox")) {
    auto crs = bb->attr(v130 ? "CRS" : "SRS");
    if (!crs) crs = bb->attr(v130 ? "SRS" : "CRS");
    const auto minx = to_double(bb->attr("minx"));
    const auto miny = to_double(bb->attr("miny"));
    const auto maxx = to_double(bb->attr("maxx"));
    const auto maxy = to_double(bb->attr("maxy"));
    if (crs && minx && miny && maxx && maxy) {
      layer.bounding_boxes.push_back({trim(*crs), *minx, *miny, *maxx, *maxy});
    }
  }
  layer.time_dimension = read_time_dimension(node);

  for (const auto* child : node.all("Layer")) {
    layer.children.push_back(read_layer(*child, layer.crs_list, layer.geographic_bbox, v130));
  }
  return layer;
}

std::string legacy_format_mime(std::string_view tag) {
  const std::string t = to_upper(tag);
  if (t == "PNG") return "image/png";
  if (t == "JPEG" || t == "JPG") return "image/jpeg";
  if (t == "GIF") return "image/gif";
  if (t == "TIFF" || t == "GEOTIFF") return "image/tiff";
  if (t == "SVG") return "image/svg+xml";
  if (t == "WBMP") return "image/vnd.wap.wbmp";
  return "image/" + to_lower(tag);
}

std::vector<std::string> read_formats(const XmlNode* capability) {
  std::vector<std::string> out;
  if (capability == nullptr) return out;
  const auto* request = capability->child("Request");
  if (request == nullptr) return out;
  if (const auto* getmap = request->child("GetMap")) {
    for (const auto* f : getmap->all("Format")) {
      auto t = trim(f->text);
      if (!t.empty()) out.push_back(std::move(t));
    }
  } else if (const auto* map = request->child("Map")) {
    // 1.0.0: <Format><PNG/><JPEG/></Format>
    if (const auto* f = map->child("Format")) {
      for (const auto& c : f->children) out.push_back(legacy_format_mime(c->name));
    }
  }
  return out;
}

WmsVersion read_version(const XmlNode& root, bool v130_root) {
  const auto attr = root.attr("version");
  if (attr) {
    if (auto v = wms_version_from_string(trim(*attr))) {
      // 1.3.0 is only legal under WMS_Capabilities and vice versa.
      if (v130_root == (*v == WmsVersion::V1_3_0)) return *v;
    }
  }
  return v130_root ? WmsVersion::V1_3_0 : WmsVersion::V1_1_1;
}

PublisherSoftware read_declared_software(const XmlNode& root, const CapabilitiesDoc& doc,
                                         const std::vector<std::string>& comments) {
  for (const auto& [k, v] : root.attrs) {
    if (icontains(k, "esri") || icontains(v, "esri.com")) return PublisherSoftware::ArcgisServer;
  }
  for (const auto& c : comments) {
    if (icontains(c, "MapServer")) return PublisherSoftware::Mapserver;
  }
  if (icontains(doc.title, "GeoServer")) return PublisherSoftware::Geoserver;
  if (doc.online_resource) return publisher_from_url(*doc.online_resource);
  return PublisherSoftware::Unknown;
}

}  // namespace

CapabilitiesDoc parse_capabilities(std::string_view xml, const ParseOptions& options) {
  if (xml.size() > options.max_bytes) {
    throw ParseError(ParseErrc::Truncated, "capabilities document exceeds " +
                                               std::to_string(options.max_bytes) + " bytes");
  }
  if (xml.empty()) throw ParseError(ParseErrc::NotXml, "empty payload");

  const auto attempt = parse_xml(xml, false);
  if (attempt->error != XML_ERROR_NONE || !attempt->state.root) {
    const char* reason = attempt->error != XML_ERROR_NONE ? XML_ErrorString(attempt->error)
                                                          : "no root element";
    throw ParseError(ParseErrc::NotXml, std::string("not well-formed XML: ") + reason);
  }
  const XmlNode& root = *attempt->state.root;
  const bool v130 = root.name == "WMS_Capabilities";
  if (!v130 && root.name != "WMT_MS_Capabilities") {
    throw ParseError(ParseErrc::NotWms, "unexpected root element <" + root.qname + ">");
  }

  CapabilitiesDoc doc;
  doc.root_element = root.name;
  doc.service_version = read_version(root, v130);
  doc.raw_size_bytes = xml.size();

  const XmlNode* service = root.child("Service");
  doc.title = child_text(service, "Title");
  doc.abstract_text = child_text(service, "Abstract");
  doc.keywords = read_keywords(service);
  if (service != nullptr) {
    if (const auto* contact = service->child("ContactInformation")) {
      auto org = child_text(contact->child("ContactPersonPrimary"), "ContactOrganization");
      if (!org.empty()) doc.contact_organization = std::move(org);
    }
    if (const auto* online = service->child("OnlineResource")) {
      auto href = online->attr("href");
      std::string value = href ? trim(*href) : trim(online->text);
      if (!value.empty()) doc.online_resource = std::move(value);
    }
  }

  const XmlNode* capability = root.child("Capability");
  doc.supported_formats = read_formats(capability);
  if (capability != nullptr) {
    for (const auto* layer : capability->all("Layer")) {
      doc.root_layers.push_back(read_layer(*layer, {}, std::nullopt, v130));
    }
  }
  doc.declared_software = read_declared_software(root, doc, attempt->state.comments);
  return doc;
}

std::optional<std::string> xml_root_element(std::string_view xml) {
  if (xml.empty()) return std::nullopt;
  const auto attempt = parse_xml(xml, true);
  if (!attempt->state.root) return std::nullopt;
  if (attempt->error != XML_ERROR_NONE && attempt->error != XML_ERROR_ABORTED) return std::nullopt;
  return attempt->state.root->name;
}

namespace {

void walk(const LayerRecord& layer, std::size_t depth,
          const std::function<void(const LayerRecord&, std::size_t)>& fn) {
  fn(layer, depth);
  for (const auto& c : layer.children) walk(c, depth + 1, fn);
}

const LayerRecord* find_first_named(const LayerRecord& layer) {
  if (layer.is_named()) return &layer;
  for (const auto& c : layer.children) {
    if (const auto* hit = find_first_named(c)) return hit;
  }
  return nullptr;
}

}  // namespace

void for_each_layer(const CapabilitiesDoc& doc,
                    const std::function<void(const LayerRecord&, std::size_t)>& fn) {
  for (const auto& l : doc.root_layers) walk(l, 0, fn);
}

const LayerRecord& first_named_layer(const CapabilitiesDoc& doc) {
  for (const auto& l : doc.root_layers) {
    if (const auto* hit = find_first_named(l)) return *hit;
  }
  throw LayerError(LayerErrc::NoNamedLayer, "capabilities document advertises no named layer");
}

std::size_t count_named_layers(const CapabilitiesDoc& doc) {
  std::size_t n = 0;
  for_each_layer(doc, [&](const LayerRecord& l, std::size_t) { n += l.is_named() ? 1 : 0; });
  return n;
}

std::size_t count_layers(const CapabilitiesDoc& doc) {
  std::size_t n = 0;
  for_each_layer(doc, [&](const LayerRecord&, std::size_t) { ++n; });
  return n;
}

}  // namespace wmsmon
