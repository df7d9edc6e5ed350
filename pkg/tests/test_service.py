"""Annotation-service tests over the HTTP API."""

import json
import threading

import pytest
from fastapi.testclient import TestClient

from motioncodes import data
from motioncodes.service import AnnotationStore, Manifest, create_app, load_manifest

CHOP = "111-0-01-00-1"


@pytest.fixture()
def service(tmp_path):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(
        json.dumps(
            {
                "clips": [
                    {"id": "c1", "uri": "file:///clips/c1.mp4", "noun": "cucumber", "verb": "chop"},
                    {"id": "c2", "uri": "file:///clips/c2.mp4", "noun": "kettle", "verb": "pour"},
                    {"id": "c3", "uri": "file:///clips/c3.mp4"},
                ]
            }
        )
    )
    store_path = tmp_path / "store.jsonl"
    manifest = load_manifest(manifest_path)
    store = AnnotationStore(store_path)
    client = TestClient(create_app(manifest, store))
    return client, store_path


def walk_tree(node, answers):
    bits = ""
    for fragment in answers:
        matches = [o for o in node["options"] if o["label"].startswith(fragment)]
        assert len(matches) == 1
        option = matches[0]
        bits += option["bits"]
        if option.get("leaf"):
            return bits
        node = option["next"]
    raise AssertionError("did not reach a leaf")


class TestTaxonomyEndpoint:
    def test_chop_traversal(self, service):
        client, _ = service
        tree = client.get("/api/taxonomy").json()
        bits = walk_tree(
            tree, ["contact", "soft", "continuous", "acyclical", "one", "none", "moves"]
        )
        from motioncodes.taxonomy import parse_code

        assert parse_code(bits).canonical() == CHOP

    def test_schema(self, service):
        client, _ = service
        tree = client.get("/api/taxonomy").json()
        assert set(tree) >= {"question", "options"}
        for option in tree["options"]:
            assert "label" in option and "bits" in option
            assert ("next" in option) != bool(option.get("leaf"))


class TestManifestEndpoint:
    def test_annotated_flags(self, service):
        client, _ = service
        clips = client.get("/api/manifest").json()["clips"]
        assert [c["id"] for c in clips] == ["c1", "c2", "c3"]
        assert all(not c["annotated"] for c in clips)
        client.post("/api/annotations", json={"clip_id": "c2", "code": CHOP, "annotator": "t"})
        clips = client.get("/api/manifest").json()["clips"]
        assert [c["annotated"] for c in clips] == [False, True, False]


class TestVerbsEndpoint:
    def test_lookup(self, service):
        client, _ = service
        res = client.get("/api/verbs", params={"code": "101-0-00-00-0"})
        assert res.status_code == 200
        assert res.json() == {"verbs": ["grasp", "hold"]}

    def test_chop_hints_include_chop_and_cut(self, service):
        client, _ = service
        verbs = client.get("/api/verbs", params={"code": CHOP}).json()["verbs"]
        assert "chop" in verbs and "cut" in verbs

    def test_invalid_code(self, service):
        client, _ = service
        res = client.get("/api/verbs", params={"code": "111-0-10-00-1"})
        assert res.status_code == 400
        assert res.json()["error"] == "InvalidCode"


class TestAnnotationPost:
    def test_valid_post(self, service):
        client, store_path = service
        res = client.post(
            "/api/annotations",
            json={"clip_id": "c1", "code": "111001001", "annotator": "alice"},
        )
        assert res.status_code == 201
        assert res.json()["code"] == CHOP  # canonicalized
        lines = store_path.read_text().strip().splitlines()
        assert json.loads(lines[0])["clip_id"] == "c1"

    def test_invalid_code_400(self, service):
        client, _ = service
        res = client.post("/api/annotations", json={"clip_id": "c1", "code": "111-0-10-00-1"})
        assert res.status_code == 400
        assert res.json()["error"] == "InvalidCode"

    def test_unknown_clip_404(self, service):
        client, _ = service
        res = client.post("/api/annotations", json={"clip_id": "nope", "code": CHOP})
        assert res.status_code == 404
        assert res.json()["error"] == "UnknownClip"

    def test_duplicate_409_and_overwrite(self, service):
        client, store_path = service
        assert client.post("/api/annotations", json={"clip_id": "c1", "code": CHOP}).status_code == 201
        dup = client.post("/api/annotations", json={"clip_id": "c1", "code": CHOP})
        assert dup.status_code == 409
        assert dup.json()["error"] == "DuplicateAnnotation"
        over = client.post(
            "/api/annotations",
            params={"overwrite": "true"},
            json={"clip_id": "c1", "code": "000-0-00-01-1"},
        )
        assert over.status_code == 201
        # append-only: both lines remain, latest wins
        lines = store_path.read_text().strip().splitlines()
        assert len(lines) == 2
        clips = client.get("/api/manifest").json()["clips"]
        assert clips[0]["annotated"]

    def test_malformed_body_400(self, service):
        client, _ = service
        res = client.post("/api/annotations", json={"code": CHOP})
        assert res.status_code == 400


class TestExport:
    def test_jsonl_export_parses_as_dataset(self, service, tmp_path):
        client, _ = service
        client.post("/api/annotations", json={"clip_id": "c1", "code": CHOP})
        client.post("/api/annotations", json={"clip_id": "c2", "code": "000-0-00-01-1"})
        res = client.get("/api/annotations", params={"format": "jsonl"})
        assert res.status_code == 200
        out = tmp_path / "export.jsonl"
        out.write_text(res.text)
        ds = data.load_dataset(out, split="train")
        assert len(ds) == 2
        assert ds.examples[0].id == "c1"
        assert ds.examples[0].verb == "chop"
        assert ds.examples[0].code.canonical() == CHOP
        assert ds.feature_dim == 0

    def test_unknown_format_400(self, service):
        client, _ = service
        assert client.get("/api/annotations", params={"format": "csv"}).status_code == 400

    def test_empty_export(self, service):
        client, _ = service
        res = client.get("/api/annotations")
        assert res.status_code == 200
        assert res.text == ""


class TestStore:
    def test_reload_sees_existing_annotations(self, service, tmp_path):
        client, store_path = service
        client.post("/api/annotations", json={"clip_id": "c1", "code": CHOP})
        reloaded = AnnotationStore(store_path)
        assert reloaded.snapshot()["c1"]["code"] == CHOP

    def test_concurrent_posts_all_land(self, service):
        client, store_path = service
        codes = ["111-0-01-00-1", "000-0-00-01-1", "101-0-00-00-0"]

        def post(clip, code):
            client.post("/api/annotations", json={"clip_id": clip, "code": code})

        threads = [
            threading.Thread(target=post, args=(clip, code))
            for clip, code in zip(["c1", "c2", "c3"], codes)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        lines = store_path.read_text().strip().splitlines()
        assert len(lines) == 3
        assert {json.loads(l)["clip_id"] for l in lines} == {"c1", "c2", "c3"}


class TestManifestLoader:
    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"clips": [{"id": "a", "uri": "u"}, {"id": "a", "uri": "v"}]}))
        from motioncodes.service import ManifestError

        with pytest.raises(ManifestError):
            load_manifest(path)


class TestFrontendFixtureSync:
    def test_served_tree_matches_committed_fixture(self, service):
        # the browser wizard's tests run against this committed copy; if the
        # tree changes, regenerate frontend/tests/fixtures/taxonomy.json
        from pathlib import Path

        fixture = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures" / "taxonomy.json"
        if not fixture.exists():
            pytest.skip("frontend fixture not present")
        client, _ = service
        assert client.get("/api/taxonomy").json() == json.loads(fixture.read_text())
