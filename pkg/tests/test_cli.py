import json
from pathlib import Path

import pytest

from algf.almost import b2_zn_almost_groupoid
from algf.census import cyclic_group_table
from algf.cli import (
    load_structure,
    parse_structure_file,
    parse_structure_text,
    run_command,
    serialize_structure,
    structure_to_doc,
)
from algf.groupoid import pair_groupoid
from algf.kernel import StructureError

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


class TestParsing:
    def test_b2_z4_fixture_matches_builder(self):
        assert parse_structure_file(str(FIXTURES / "b2_z4.json")) == b2_zn_almost_groupoid(4)

    def test_pair_fixtures_match_builders(self):
        assert parse_structure_file(str(FIXTURES / "pair3.json")) == pair_groupoid([1, 2, 3])
        assert parse_structure_file(str(FIXTURES / "pair2.json")) == pair_groupoid([1, 2])

    def test_round_trip_tables(self, almost_corpus, groupoid_corpus, gg_corpus):
        for S in almost_corpus + groupoid_corpus + gg_corpus:
            assert parse_structure_text(serialize_structure(S)) == S

    def test_round_trip_bytes(self):
        for name in ("pair3.json", "b2_z4.json", "z4.json", "z2z2.json"):
            text = (FIXTURES / name).read_text()
            assert serialize_structure(parse_structure_text(text)) == text

    def test_syntax_error_reports_line(self):
        with pytest.raises(StructureError) as exc:
            parse_structure_text('{"kind": "groupoid",\n  broken')
        assert exc.value.code == "syntax-error"
        assert "line 2" in str(exc.value)

    def test_unknown_field_rejected(self):
        doc = structure_to_doc(b2_zn_almost_groupoid(2))
        doc["extra"] = True
        with pytest.raises(StructureError) as exc:
            parse_structure_text(json.dumps(doc))
        assert exc.value.code == "schema-violation"

    def test_kind_specific_fields_enforced(self):
        doc = structure_to_doc(b2_zn_almost_groupoid(2))
        doc["source"] = doc["theta"]
        with pytest.raises(StructureError) as exc:
            parse_structure_text(json.dumps(doc))
        assert exc.value.code == "schema-violation"

    def test_product_triple_outside_composable_set_names_the_triple(self, tmp_path):
        doc = structure_to_doc(b2_zn_almost_groupoid(2))
        doc["product"].append(["(0,0)", "(1,0)", "(0,0)"])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(StructureError) as exc:
            parse_structure_file(str(path))
        assert exc.value.code == "product-entry-outside-composable-set"
        assert "(0,0)" in str(exc.value) and "(1,0)" in str(exc.value)
        assert "bad.json" in str(exc.value)

    def test_missing_file(self):
        with pytest.raises(StructureError) as exc:
            parse_structure_file("no/such/file.json")
        assert exc.value.code == "file-not-found"

    def test_builtin_uris(self):
        from algf.kernel import is_rule_structure

        assert load_structure("builtin:rstar2?a=3").name == "rstar2(a=3)"
        assert load_structure("builtin:b2zn?n=4") == b2_zn_almost_groupoid(4)
        assert is_rule_structure(load_structure("builtin:sqrtdet?mode=float"))
        with pytest.raises(StructureError) as exc:
            load_structure("builtin:wat")
        assert exc.value.code == "unknown-builtin"

    @pytest.mark.parametrize(
        "uri",
        [
            "builtin:rstar2?a=2",
            "builtin:sqrtdet",
            "builtin:sqrtdet?mode=float",
            "builtin:triangular",
            "builtin:rstar",
            "builtin:gl?n=2",
            "builtin:b2zn?n=3",
            "builtin:pair?n=2",
            "builtin:null?n=2",
            "builtin:sym?m=2",
        ],
    )
    def test_every_builtin_validates(self, uri):
        code, out = run_command(["validate", uri, "--samples", "60"])
        assert code == 0, out


class TestValidateCommand:
    def test_pass(self):
        code, out = run_command(["validate", str(FIXTURES / "pair3.json")])
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["verdict"] == "pass"
        assert doc["verified_as"] == "groupoid"

    def test_reinterpret_fails_with_witness(self):
        code, out = run_command(
            ["validate", "--as", "almost", str(FIXTURES / "pair2.json")]
        )
        assert code == 1
        doc = json.loads(out)
        assert doc["report"]["verdict"] == "fail"
        failing = [c for c in doc["report"]["checks"] if not c["passed"]]
        assert failing[0]["witness"]["elements"] == ["(1,2)", "(2,1)"]

    def test_builtin_sampled(self):
        code, out = run_command(
            ["validate", "builtin:rstar2?a=2", "--samples", "150", "--seed", "9"]
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["samples"] == 150 and doc["seed"] == 9

    def test_group_passes_under_every_kind(self):
        # a one-unit table satisfies all three axiom systems
        for as_kind in ("groupoid", "almost", "gengroup"):
            code, _ = run_command(
                ["validate", "--as", as_kind, str(FIXTURES / "z4.json")]
            )
            assert code == 0, as_kind

    def test_partial_product_is_not_a_generalized_group(self):
        code, out = run_command(
            ["validate", "--as", "gengroup", str(FIXTURES / "pair2.json")]
        )
        assert code == 1
        doc = json.loads(out)
        failing = [c["name"] for c in doc["report"]["checks"] if not c["passed"]]
        assert "product-total" in failing

    def test_seed_env_override(self, monkeypatch):
        monkeypatch.setenv("ALGF_SEED", "42")
        code, out = run_command(["validate", "builtin:rstar2?a=2"])
        assert json.loads(out)["seed"] == 42
        code, out = run_command(["validate", "builtin:rstar2?a=2", "--seed", "3"])
        assert json.loads(out)["seed"] == 3

    def test_missing_file_is_usage_error(self):
        code, out = run_command(["validate", "missing.json"])
        assert code == 2
        assert json.loads(out)["error"]["code"] == "file-not-found"

    def test_determinism(self):
        args = ["validate", "builtin:sqrtdet", "--samples", "60"]
        assert run_command(args) == run_command(args)


class TestAnalyzeCommand:
    def test_almost_structure(self):
        code, out = run_command(["analyze", str(FIXTURES / "b2_z4.json")])
        assert code == 0
        doc = json.loads(out)
        assert doc["transitive"] is None
        assert [s["size"] for s in doc["isotropy_signature"]] == [4, 4]
        assert doc["isotropy_bundle"]["classification"] == "normal"

    def test_groupoid_transitivity(self):
        code, out = run_command(["analyze", str(FIXTURES / "pair3.json")])
        doc = json.loads(out)
        assert doc["transitive"] is True
        assert doc["isotropy_bundle"] == {"size": 3, "classification": "normal"}

    def test_determinism(self):
        args = ["analyze", str(FIXTURES / "b2_z4.json")]
        assert run_command(args) == run_command(args)


class TestConstructCommand:
    def test_union(self, tmp_path):
        out_file = tmp_path / "u.json"
        code, out = run_command(
            [
                "construct",
                "--op",
                "union",
                str(FIXTURES / "z2.json"),
                str(FIXTURES / "z3.json"),
                "-o",
                str(out_file),
            ]
        )
        assert code == 0
        built = parse_structure_file(str(out_file))
        assert built.order == 5 and len(built.units) == 2

    def test_direct(self, tmp_path):
        out_file = tmp_path / "d.json"
        code, _ = run_command(
            [
                "construct",
                "--op",
                "direct",
                str(FIXTURES / "z2.json"),
                str(FIXTURES / "z3.json"),
                "-o",
                str(out_file),
            ]
        )
        assert code == 0
        built = parse_structure_file(str(out_file))
        assert built.order == 6 and len(built.units) == 1

    def test_semidirect_with_action_file(self, tmp_path):
        action = [
            [g, f"h{i}", f"h{i}" if g == "g0" else f"h{(-i) % 3}"]
            for g in ("g0", "g1")
            for i in range(3)
        ]
        action_file = tmp_path / "action.json"
        action_file.write_text(json.dumps(action))
        out_file = tmp_path / "sd.json"
        code, _ = run_command(
            [
                "construct",
                "--op",
                "semidirect",
                str(FIXTURES / "z2.json"),
                str(FIXTURES / "z3.json"),
                "--action",
                str(action_file),
                "-o",
                str(out_file),
            ]
        )
        assert code == 0
        built = parse_structure_file(str(out_file))
        from algf.census import are_isomorphic, dihedral_group_table

        assert are_isomorphic(built, dihedral_group_table(3)) is not None

    def test_semidirect_requires_action(self, tmp_path):
        code, out = run_command(
            [
                "construct",
                "--op",
                "semidirect",
                str(FIXTURES / "z2.json"),
                str(FIXTURES / "z3.json"),
                "-o",
                str(tmp_path / "x.json"),
            ]
        )
        assert code == 2

    def test_failing_action_exit_one(self, tmp_path):
        action = [[g, f"h{i}", "h0"] for g in ("g0", "g1") for i in range(3)]
        action_file = tmp_path / "collapse.json"
        action_file.write_text(json.dumps(action))
        code, out = run_command(
            [
                "construct",
                "--op",
                "semidirect",
                str(FIXTURES / "z2.json"),
                str(FIXTURES / "z3.json"),
                "--action",
                str(action_file),
                "-o",
                str(tmp_path / "x.json"),
            ]
        )
        assert code == 1
        assert json.loads(out)["error"]["code"] == "action-verification-failed"


class TestIsoCommand:
    def test_not_isomorphic(self):
        code, out = run_command(
            ["iso", str(FIXTURES / "z4.json"), str(FIXTURES / "z2z2.json")]
        )
        assert code == 1
        assert json.loads(out)["isomorphic"] is False

    def test_isomorphic_with_witness(self, tmp_path):
        other = tmp_path / "z4b.json"
        from algf.kernel import relabel_table

        other.write_text(
            serialize_structure(relabel_table(cyclic_group_table(4), lambda l: "q" + l))
        )
        code, out = run_command(["iso", str(FIXTURES / "z4.json"), str(other)])
        assert code == 0
        doc = json.loads(out)
        assert doc["isomorphic"] is True
        assert doc["witness"]["f"]["g0"] == "qg0"


class TestEnumerateCommand:
    def test_almost_order_three(self):
        code, out = run_command(
            ["enumerate", "--kind", "almost", "--order", "3", "--units", "1"]
        )
        assert code == 0
        assert json.loads(out)["count"] == 1

    def test_almost_all_unit_counts(self):
        code, out = run_command(["enumerate", "--kind", "almost", "--order", "3"])
        doc = json.loads(out)
        # one single-fiber structure, one 2+1 split, one null structure
        assert doc["count"] == 3

    def test_gengroup(self):
        code, out = run_command(["enumerate", "--kind", "gengroup", "--order", "2"])
        assert json.loads(out)["count"] == 3

    def test_determinism(self):
        args = ["enumerate", "--kind", "almost", "--order", "4"]
        assert run_command(args) == run_command(args)


class TestCayleyCommand:
    def test_pair_groupoid(self):
        code, out = run_command(["cayley", str(FIXTURES / "pair3.json")])
        assert code == 0
        doc = json.loads(out)
        assert doc["injective"] is True
        assert doc["translations"] == 9
        assert doc["report"]["isomorphism"] is True

    def test_almost_structure_via_groupoid_view(self):
        code, out = run_command(["cayley", str(FIXTURES / "b2_z4.json")])
        assert code == 0


class TestUsage:
    def test_unknown_subcommand(self):
        code, _ = run_command(["frobnicate"])
        assert code == 2

    def test_report_out_writes_file(self, tmp_path):
        report = tmp_path / "report.json"
        code, out = run_command(
            ["validate", str(FIXTURES / "pair3.json"), "--out", str(report)]
        )
        assert code == 0
        assert out == ""
        assert json.loads(report.read_text())["report"]["verdict"] == "pass"
