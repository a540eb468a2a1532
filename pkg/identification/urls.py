from django.urls import path, include
from rest_framework.routers import DefaultRouter
from .views import IdentificationRunViewSet

router = DefaultRouter()
router.register(r'runs', IdentificationRunViewSet)

urlpatterns = [
    path('', include(router.urls)),
]
