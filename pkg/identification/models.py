from django.db import models
from django.contrib.auth import get_user_model

User = get_user_model()


class IdentificationRunManager(models.Manager):
    def get_queryset(self):
        return super().get_queryset().filter(is_active=True)

    def with_inactive(self):
        return super().get_queryset()


class IdentificationRun(models.Model):
    STATUS_ACCEPTED = 'accepted'
    STATUS_FAILED = 'failed'
    STATUS_CHOICES = [
        (STATUS_ACCEPTED, 'Accepted'),
        (STATUS_FAILED, 'Failed'),
    ]

    name = models.CharField(max_length=200)
    sample_count = models.PositiveIntegerField()
    eta_hat = models.PositiveSmallIntegerField(null=True, blank=True)
    d_hat = models.PositiveSmallIntegerField(null=True, blank=True)
    converged = models.BooleanField(default=False)
    status = models.CharField(max_length=16, choices=STATUS_CHOICES)
    report = models.JSONField(null=True, blank=True)
    error_message = models.TextField(blank=True, default='')
    is_active = models.BooleanField(default=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)
    created_by = models.ForeignKey(
        User,
        on_delete=models.SET_NULL,
        null=True,
        related_name='identification_runs_created'
    )
    updated_by = models.ForeignKey(
        User,
        on_delete=models.SET_NULL,
        null=True,
        related_name='identification_runs_updated'
    )

    # Only active runs by default
    objects = IdentificationRunManager()
    all_objects = models.Manager()

    class Meta:
        ordering = ['-created_at', 'name']
        indexes = [
            models.Index(fields=['name'], name='ident_run_name_idx'),
            models.Index(fields=['status'], name='ident_run_status_idx'),
            models.Index(fields=['is_active'], name='ident_run_active_idx'),
        ]
        permissions = [
            ('run_identification', 'Can run ARX identification'),
        ]

    def __str__(self):
        name = self.name or 'Unnamed run'
        if self.eta_hat is None:
            return f"{name} ({self.status or 'pending'})"
        return f"{name} (eta={self.eta_hat})"

    def get_theta(self):
        if not self.report:
            return []
        return list(self.report.get('theta', []))

    def delete(self, using=None, keep_parents=False, updated_by=None):
        """
        Soft delete the run by setting is_active to False
        """
        self.is_active = False
        self.updated_by = updated_by
        self.save(using=using)

    def hard_delete(self, using=None, keep_parents=False):
        return super().delete(using=using, keep_parents=keep_parents)
