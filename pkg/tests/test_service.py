import pytest
from fastapi.testclient import TestClient

from stlworkbench.service import create_app

RUN_DEMO_ACTIONS = [
    "moveW", "moveW", "moveW", "moveW", "moveW", "moveW", "moveW",
    "moveS", "moveS", "moveS", "moveS", "moveS", "moveS",
    "toggleLamp", "moveE", "moveE", "moveE", "moveN", "pickUp",
]
RUN_DEMO_INITIAL = {"robot": [7, 7]}
PHI3 = "F[0,15]((lampOn & F[0,10](itemOnRobot(purpleCube))))"


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "sessions")
    with TestClient(app) as c:
        yield c


def drive_running_example(client):
    session_id = client.post("/sessions").json()["id"]
    resp = client.post(f"/sessions/{session_id}/nl",
                       json={"text": "turn on the lamp and pick up the cube"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["pendingQuestions"] == 3
    assert body["bounds"] == [3, 5]
    client.post(f"/sessions/{session_id}/demos", json={
        "actions": RUN_DEMO_ACTIONS, "label": "positive", "initial": RUN_DEMO_INITIAL,
    })
    answers = {"taskOrder": True, "F1": 15, "F2": 10}
    for question in client.get(f"/sessions/{session_id}/questions").json():
        payload = answers["taskOrder"] if question["kind"] == "taskOrder" else answers[question["slot"]]
        resp = client.post(f"/sessions/{session_id}/answers",
                           json={"questionId": question["id"], "payload": payload})
        assert resp.status_code == 200
    return session_id


class TestSessionLifecycle:
    def test_create_and_world(self, client):
        assert "id" in client.post("/sessions").json()
        world = client.get("/world").json()
        assert world["width"] == 8 and world["lamp"] == [0, 0]

    def test_running_example_selection(self, client):
        session_id = drive_running_example(client)
        formula = client.get(f"/sessions/{session_id}/formula").json()
        assert formula["status"] == "selected"
        assert formula["formula"] == PHI3
        assert formula["userInteractions"] == 3

    def test_candidates_shrink_after_ordering_answer(self, client):
        session_id = client.post("/sessions").json()["id"]
        client.post(f"/sessions/{session_id}/nl",
                    json={"text": "turn on the lamp and pick up the cube"})
        before = client.get(f"/sessions/{session_id}/candidates").json()
        assert before["enumerated"] == 14
        question = client.get(f"/sessions/{session_id}/questions").json()[0]
        assert question["kind"] == "taskOrder"
        client.post(f"/sessions/{session_id}/answers",
                    json={"questionId": question["id"], "payload": True})
        after = client.get(f"/sessions/{session_id}/candidates").json()
        assert len(after["templates"]) < len(before["templates"])

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/questions").status_code == 404

    def test_duplicate_answer_409(self, client):
        session_id = client.post("/sessions").json()["id"]
        client.post(f"/sessions/{session_id}/nl", json={"text": "pick up the purple cube"})
        question = client.get(f"/sessions/{session_id}/questions").json()[0]
        first = client.post(f"/sessions/{session_id}/answers",
                            json={"questionId": question["id"], "payload": 15})
        assert first.status_code == 200
        second = client.post(f"/sessions/{session_id}/answers",
                             json={"questionId": question["id"], "payload": 15})
        assert second.status_code == 409

    def test_bad_demo_422(self, client):
        session_id = client.post("/sessions").json()["id"]
        resp = client.post(f"/sessions/{session_id}/demos",
                           json={"actions": ["fly"], "label": "positive"})
        assert resp.status_code == 422
        resp = client.post(f"/sessions/{session_id}/demos", json={
            "actions": ["moveE"], "label": "positive", "initial": {"robot": [3, 3]},
        })
        assert resp.status_code == 422  # inside a wall

    def test_wall_bump_demo_accepted_and_marked(self, client):
        session_id = client.post("/sessions").json()["id"]
        resp = client.post(f"/sessions/{session_id}/demos", json={
            "actions": ["moveE"], "label": "positive", "initial": {"robot": [2, 3]},
        })
        assert resp.status_code == 200
        trace = resp.json()["trace"]
        assert trace[1]["robotAtWall"] is True


class TestPersistence:
    def test_reload_replays_identical_state(self, tmp_path):
        store_dir = tmp_path / "sessions"
        app = create_app(data_dir=store_dir)
        with TestClient(app) as client:
            session_id = drive_running_example(client)
            formula_before = client.get(f"/sessions/{session_id}/formula").json()
        # simulate a restart: fresh app over the same store
        app2 = create_app(data_dir=store_dir)
        with TestClient(app2) as client2:
            formula_after = client2.get(f"/sessions/{session_id}/formula").json()
            assert formula_after["formula"] == formula_before["formula"]
            assert formula_after["userInteractions"] == formula_before["userInteractions"]
            candidates = client2.get(f"/sessions/{session_id}/candidates").json()
            assert candidates["enumerated"] == 14


class TestTraining:
    def test_train_requires_selection(self, client):
        session_id = client.post("/sessions").json()["id"]
        assert client.post(f"/sessions/{session_id}/train", json={}).status_code == 409

    def test_train_poll_policy(self, client):
        import time
        session_id = drive_running_example(client)
        resp = client.post(f"/sessions/{session_id}/train",
                           json={"episodes": 4000, "seed": 0})
        assert resp.status_code == 202
        for _ in range(600):
            status = client.get(f"/sessions/{session_id}/train/status").json()
            if status["status"] != "running":
                break
            time.sleep(0.2)
        assert status["status"] == "finished"
        policy = client.get(f"/sessions/{session_id}/policy").json()
        assert policy["satisfied"] is True
        assert policy["actions"]
        assert policy["rollout"][-1]["itemOnRobot(purpleCube)"] is True

    def test_cancel(self, client):
        session_id = drive_running_example(client)
        client.post(f"/sessions/{session_id}/train", json={"episodes": 50_000})
        resp = client.delete(f"/sessions/{session_id}/train")
        assert resp.json()["status"] in ("cancelled", "finished")

    def test_policy_404_before_training(self, client):
        session_id = client.post("/sessions").json()["id"]
        assert client.get(f"/sessions/{session_id}/policy").status_code == 404


class TestParity:
    def test_api_matches_cli_pipeline(self, client, grid, demos):
        """The endpoint sequence and the direct pipeline agree."""
        from stlworkbench.dialogue import OracleUser, run_pipeline, SessionEngine
        from stlworkbench.formulas import format_formula, parse_formula
        engine = SessionEngine(grid)
        oracle = OracleUser.for_formula(
            parse_formula("F[0,15](lampOn & F[0,10](itemOnRobot(purpleCube)))"),
            engine.lexicon,
        )
        phi, _ = run_pipeline("turn on the lamp and pick up the cube",
                              [demos("run_lamp_cube")], oracle, grid, engine)
        session_id = drive_running_example(client)
        via_api = client.get(f"/sessions/{session_id}/formula").json()["formula"]
        assert via_api == format_formula(phi)
