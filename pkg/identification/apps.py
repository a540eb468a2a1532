from django.apps import AppConfig


class IdentificationAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'identification'
    verbose_name = 'ARX identification'
