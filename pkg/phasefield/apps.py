from django.apps import AppConfig


class PhasefieldConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'phasefield'
    verbose_name = 'Phase-field solver'
