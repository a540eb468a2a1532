import pytest
from django.contrib.auth import get_user_model
from django.contrib.auth.models import Permission
from rest_framework.test import APIClient
from identification.models import IdentificationRun


@pytest.fixture
def api_client():
    return APIClient()


@pytest.fixture
def analyst():
    user = get_user_model().objects.create_user(username='analyst', password='secret-pass')
    user.user_permissions.add(Permission.objects.get(codename='run_identification'))
    return user


@pytest.fixture
def viewer():
    return get_user_model().objects.create_user(username='viewer', password='secret-pass')


@pytest.fixture
def identify_payload(case1_clean):
    return {
        'name': 'case 1',
        'u': case1_clean.u.tolist(),
        'y': case1_clean.y.tolist(),
        'eta_max': 4,
        'bootstrap_reps': 0,
    }


def test_requires_authentication(api_client):
    response = api_client.get('/api/runs/')
    assert response.status_code == 401


def test_identify_requires_permission(api_client, viewer, identify_payload):
    api_client.force_authenticate(user=viewer)
    response = api_client.post('/api/runs/identify/', identify_payload, format='json')
    assert response.status_code == 403
    assert not IdentificationRun.all_objects.exists()


def test_identify_stores_accepted_run(api_client, analyst, identify_payload):
    api_client.force_authenticate(user=analyst)
    response = api_client.post('/api/runs/identify/', identify_payload, format='json')
    assert response.status_code == 201
    body = response.json()
    assert body['status'] == 'accepted'
    assert body['eta_hat'] == 2
    assert body['d_hat'] == 4
    assert body['sample_count'] == 1023
    assert body['theta'][:3] == pytest.approx([1.0, -0.4, 0.6], abs=1e-6)
    assert body['report']['schema_version'] == '1.0'
    run = IdentificationRun.objects.get(pk=body['id'])
    assert run.created_by == analyst
    assert str(run) == 'case 1 (eta=2)'


def test_identify_order_search_failure(api_client, analyst, identify_payload):
    api_client.force_authenticate(user=analyst)
    identify_payload['eta_max'] = 1
    response = api_client.post('/api/runs/identify/', identify_payload, format='json')
    assert response.status_code == 422
    body = response.json()
    assert 'no order' in body['error']
    assert body['run']['status'] == 'failed'
    assert body['run']['report']['guesses'][0]['eta_guess'] == 1
    assert IdentificationRun.objects.get().status == IdentificationRun.STATUS_FAILED


@pytest.mark.parametrize('change', [
    {'y': [0.0] * 20, 'u': [1.0] * 21},
    {'u': [1.0] * 8, 'y': [0.5] * 8},
    {'eta_guess_initial': 5, 'eta_max': 3},
    {'u': []},
])
def test_identify_bad_requests(api_client, analyst, identify_payload, change):
    api_client.force_authenticate(user=analyst)
    identify_payload.update(change)
    response = api_client.post('/api/runs/identify/', identify_payload, format='json')
    assert response.status_code == 400


def test_simulate(api_client, viewer):
    api_client.force_authenticate(user=viewer)
    response = api_client.post('/api/runs/simulate/', {
        'a': [-0.4, 0.6], 'b': [2.0], 'delay': 1, 'prbs_order': 7,
    }, format='json')
    assert response.status_code == 200
    body = response.json()
    assert len(body['u']) == len(body['y']) == len(body['y_star']) == 127
    assert body['sigma_e2'] == 0.0
    assert body['achieved_snr'] is None
    assert body['model']['n_u'] == 1


def test_simulate_with_noise(api_client, viewer):
    api_client.force_authenticate(user=viewer)
    response = api_client.post('/api/runs/simulate/', {
        'a': [-0.3, 0.7], 'b': [1.2, 1.6], 'delay': 2, 'n': 300, 'sigma_e2': 1.7, 'seed': 4,
    }, format='json')
    assert response.status_code == 200
    body = response.json()
    assert body['seed'] == 4
    assert body['achieved_snr'] > 0
    assert body['y'] != body['y_star']


@pytest.mark.parametrize('payload', [
    {'a': [-1.5], 'b': [1.0], 'n': 100},
    {'b': [1.0], 'n': 100, 'prbs_order': 7},
    {'b': [1.0]},
    {'b': [1.0], 'n': 100, 'snr': 2.0, 'sigma_e2': 1.0},
    {'b': [1.0], 'n': 100, 'snr': 0.0},
])
def test_simulate_bad_requests(api_client, viewer, payload):
    api_client.force_authenticate(user=viewer)
    response = api_client.post('/api/runs/simulate/', payload, format='json')
    assert response.status_code == 400


def test_list_and_retrieve_runs(api_client, viewer, analyst):
    run = IdentificationRun.objects.create(name='stored', sample_count=500, status='accepted',
                                           eta_hat=2, d_hat=4, created_by=analyst)
    IdentificationRun.objects.create(name='removed', sample_count=500, status='failed', is_active=False)
    api_client.force_authenticate(user=viewer)
    response = api_client.get('/api/runs/')
    assert response.status_code == 200
    assert response.json()['count'] == 1
    assert response.json()['results'][0]['name'] == 'stored'
    detail = api_client.get(f'/api/runs/{run.pk}/')
    assert detail.status_code == 200
    assert detail.json()['theta'] == []


def test_only_owner_or_staff_can_delete(api_client, viewer, analyst):
    run = IdentificationRun.objects.create(name='mine', sample_count=500, status='accepted', created_by=analyst)
    api_client.force_authenticate(user=viewer)
    assert api_client.delete(f'/api/runs/{run.pk}/').status_code == 403

    api_client.force_authenticate(user=analyst)
    assert api_client.delete(f'/api/runs/{run.pk}/').status_code == 204
    run.refresh_from_db()
    assert not run.is_active
    assert run.updated_by == analyst
    assert api_client.get(f'/api/runs/{run.pk}/').status_code == 404


def test_staff_can_delete_any_run(api_client, analyst):
    staff = get_user_model().objects.create_user(username='admin', password='secret-pass', is_staff=True)
    run = IdentificationRun.objects.create(name='theirs', sample_count=500, status='failed', created_by=analyst)
    api_client.force_authenticate(user=staff)
    assert api_client.delete(f'/api/runs/{run.pk}/').status_code == 204


def test_token_authentication(api_client, analyst):
    response = api_client.post('/api/token/', {'username': 'analyst', 'password': 'secret-pass'}, format='json')
    assert response.status_code == 200
    api_client.credentials(HTTP_AUTHORIZATION=f"Token {response.json()['token']}")
    assert api_client.get('/api/runs/').status_code == 200


def test_report_schema(api_client, viewer, analyst, identify_payload):
    assert api_client.get('/api/runs/report-schema/').status_code == 401
    api_client.force_authenticate(user=viewer)
    response = api_client.get('/api/runs/report-schema/')
    assert response.status_code == 200
    schema = response.json()
    assert schema['title'] == 'IdentificationReport'
    assert schema['properties']['schema_version']['const'] == '1.0'

    api_client.force_authenticate(user=analyst)
    report = api_client.post('/api/runs/identify/', identify_payload, format='json').json()['report']
    assert set(schema['required']) <= set(report) <= set(schema['properties'])
