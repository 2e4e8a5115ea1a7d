import pytest

from famgraph import (
    FAMILIES,
    AbstractionMode,
    CallGraph,
    ClassInfo,
    FamilyLabel,
    Whitelist,
    abstract_graph,
    abstract_to_family,
    classify_obfuscated_class,
    default_whitelist,
    parse_api_name,
    to_undirected,
)
from famgraph.callgraph import abstract_to_api
from famgraph.exceptions import ApiParseError

WL = default_whitelist()


class TestParseApiName:
    def test_framework_call(self):
        api = parse_api_name("android.util.Log:d")
        assert api.package_path == ("android", "util")
        assert api.class_name == "Log"
        assert api.method_name == "d"

    def test_short_identifiers(self):
        api = parse_api_name("a.bc.def:g")
        assert (api.package_path, api.class_name, api.method_name) == (("a", "bc"), "def", "g")

    def test_class_reference_without_method(self):
        api = parse_api_name("java.lang.String")
        assert api.method_name == ""
        assert api.qualified_class == "java.lang.String"

    @pytest.mark.parametrize("raw", ["x", "a..b:c", ".a.b", "a.b.:m", "", "a.b:c:d"])
    def test_malformed(self, raw):
        with pytest.raises(ApiParseError):
            parse_api_name(raw)

    def test_error_names_token(self):
        with pytest.raises(ApiParseError, match="x"):
            parse_api_name("x")

    def test_round_trip(self):
        for raw in ["android.util.Log:d", "a.bc.def:g", "java.lang.String"]:
            assert str(parse_api_name(raw)) == raw


class TestObfuscationHeuristic:
    def test_all_short(self):
        assert classify_obfuscated_class("def", ["a", "bc", "def"], True)

    def test_descriptive_names(self):
        assert not classify_obfuscated_class("Foo", ["getMessage", "execute"], True)

    def test_half_short_counts(self):
        assert classify_obfuscated_class("Foo", ["ab", "getValue"], True)

    def test_unresolvable(self):
        assert classify_obfuscated_class("Foo", ["getValue"], False)

    def test_no_methods(self):
        assert not classify_obfuscated_class("Foo", [], True)


class TestWhitelist:
    def test_api_level(self):
        assert WL.api_level == 26

    def test_families_are_framework_only(self):
        for fam in ("self-defined", "obfuscated"):
            assert not WL.packages(fam)

    def test_every_framework_family_present(self):
        for fam in FAMILIES[:10]:
            assert WL.packages(fam), fam

    def test_longest_prefix(self):
        assert WL.lookup(("android", "util")) == ("android.util", "android")
        assert WL.lookup(("com", "google", "android", "gms", "ads", "x"))[1] == "google"

    def test_segment_match_only(self):
        assert WL.lookup(("androidx", "foo")) is None

    def test_android_and_google_disjoint(self):
        assert not WL.android_packages & WL.google_packages

    def test_exact_entries(self):
        wl = Whitelist.parse("android android exact\nandroid.util android\n")
        assert wl.lookup(("android",)) == ("android", "android")
        assert wl.lookup(("android", "util", "x")) == ("android.util", "android")
        assert wl.lookup(("android", "mywidget")) is None

    def test_parse_rejects_bad_lines(self):
        with pytest.raises(ValueError):
            Whitelist.parse("android.util\n")
        with pytest.raises(ValueError):
            Whitelist.parse("a android\na java\n")
        with pytest.raises(ValueError):
            Whitelist.parse("my.pkg self-defined\n")


class TestFamilyAbstraction:
    def test_framework(self):
        assert abstract_to_family(parse_api_name("android.util.Log:d"), WL) is FamilyLabel.ANDROID

    def test_fake_google_package_is_self_defined(self):
        assert abstract_to_family(parse_api_name("com.google.MyMalware:run"), WL) is FamilyLabel.SELF_DEFINED

    def test_short_names_are_obfuscated(self):
        classes = {"a.bc.def": ClassInfo(("g", "hi"))}
        assert abstract_to_family(parse_api_name("a.bc.def:g"), WL, classes) is FamilyLabel.OBFUSCATED

    def test_obfuscation_takes_precedence(self):
        classes = {"android.util.Log": ClassInfo(("d",), resolvable=False)}
        assert abstract_to_family(parse_api_name("android.util.Log:d"), WL, classes) is FamilyLabel.OBFUSCATED

    def test_api_mode_keeps_package(self):
        assert abstract_to_api(parse_api_name("android.util.Log:d"), WL) == "android.util"
        assert abstract_to_api(parse_api_name("my.app.Main:run"), WL) == "self-defined"

    def test_graph_merge(self):
        g = CallGraph([("android.util.Log:d", "java.lang.Throwable:getMessage", 2),
                       ("android.net.http.X:y", "java.sql.Z:w", 3)])
        fam = abstract_graph(g, "family")
        assert fam.mode is AbstractionMode.FAMILY
        assert fam.edges == [("android", "java", 5)]

    def test_empty_graph(self):
        assert abstract_graph(CallGraph(), "family").n_nodes == 0

    def test_self_loop_kept(self):
        g = CallGraph([("android.util.Log:d", "android.os.Bundle:get", 1)])
        assert abstract_graph(g, "family").edges == [("android", "android", 1)]

    def test_api_then_family_matches_direct(self):
        g = CallGraph([("android.util.Log:d", "my.app.Main:run", 2),
                       ("my.app.Main:run", "org.json.JSONObject:put", 1)])
        via_api = abstract_graph(abstract_graph(g, "api"), "family")
        assert via_api == abstract_graph(g, "family")

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="unknown abstraction mode"):
            abstract_graph(CallGraph(), "bogus")

    def test_no_refinement(self):
        fam = abstract_graph(CallGraph([("android.util.Log:d", "java.io.File:open", 1)]), "family")
        with pytest.raises(ValueError):
            abstract_graph(fam, "api")


class TestCallGraph:
    def test_parallel_edges_merge(self):
        g = CallGraph([("a.B:c", "d.E:f", 1), ("a.B:c", "d.E:f", 2)])
        assert g.edges == [("a.B:c", "d.E:f", 3)]
        assert g.total_weight == 3

    def test_rejects_bad_weight(self):
        for w in (0, -1, 1.5, True):
            with pytest.raises(ValueError):
                CallGraph([("a", "b", w)])

    def test_reciprocal_and_self_loops(self):
        g = CallGraph([("a", "b", 1), ("b", "a", 2), ("a", "a", 3)])
        assert g.n_edges == 3
        assert g.weight("b", "a") == 2

    def test_isolated_nodes(self):
        g = CallGraph([("a", "b", 1)], nodes=["z"])
        assert g.nodes == ("z", "a", "b")
        assert "z" in g

    def test_equality_ignores_order(self):
        g1 = CallGraph([("a", "b", 1), ("b", "c", 1)])
        g2 = CallGraph([("b", "c", 1), ("a", "b", 1)])
        assert g1 == g2 and hash(g1) == hash(g2)


class TestUndirected:
    def test_sums_directions(self):
        v = to_undirected(CallGraph([("a", "b", 2), ("b", "a", 3)]))
        assert dict(v.weights) == {("a", "b"): 5}

    def test_drops_self_loops(self):
        v = to_undirected(CallGraph([("a", "a", 7)]))
        assert v.nodes == ("a",) and not v.weights

    def test_empty(self):
        v = to_undirected(CallGraph())
        assert v.n_nodes == 0 and v.n_edges == 0
