from django.apps import AppConfig


class OrbitsConfig(AppConfig):
    name = 'orbits'
    verbose_name = 'Collision Orbit Finder'
