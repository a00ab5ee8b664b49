import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--long",
        action="store_true",
        default=False,
        help="run the long desk-scale studies (tens of minutes)",
    )


@pytest.fixture
def long_run(request):
    if not request.config.getoption("--long"):
        pytest.skip("needs --long (desk-scale runtime)")
    return True
