# Generated by Django 4.2.21 on 2026-10-17 09:12

from django.conf import settings
from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
        migrations.swappable_dependency(settings.AUTH_USER_MODEL),
    ]

    operations = [
        migrations.CreateModel(
            name='IdentificationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=200)),
                ('sample_count', models.PositiveIntegerField()),
                ('eta_hat', models.PositiveSmallIntegerField(blank=True, null=True)),
                ('d_hat', models.PositiveSmallIntegerField(blank=True, null=True)),
                ('converged', models.BooleanField(default=False)),
                ('status', models.CharField(choices=[('accepted', 'Accepted'), ('failed', 'Failed')], max_length=16)),
                ('report', models.JSONField(blank=True, null=True)),
                ('error_message', models.TextField(blank=True, default='')),
                ('is_active', models.BooleanField(default=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('created_by', models.ForeignKey(null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='identification_runs_created', to=settings.AUTH_USER_MODEL)),
                ('updated_by', models.ForeignKey(null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='identification_runs_updated', to=settings.AUTH_USER_MODEL)),
            ],
            options={
                'ordering': ['-created_at', 'name'],
                'permissions': [('run_identification', 'Can run ARX identification')],
                'indexes': [models.Index(fields=['name'], name='ident_run_name_idx'), models.Index(fields=['status'], name='ident_run_status_idx'), models.Index(fields=['is_active'], name='ident_run_active_idx')],
            },
        ),
    ]
