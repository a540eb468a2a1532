from rest_framework import permissions


class IsOwnerOrAdmin(permissions.BasePermission):
    """
    Only the user who started a run, or staff, may delete it.
    """

    def has_object_permission(self, request, view, obj):
        # Read permissions are allowed to any authenticated request.
        if request.method in permissions.SAFE_METHODS:
            return True

        return bool(request.user and (request.user.is_staff or obj.created_by_id == request.user.id))


class CanRunIdentification(permissions.BasePermission):
    """
    Running an identification needs the identification.run_identification permission.
    """

    def has_permission(self, request, view):
        return bool(request.user and request.user.has_perm('identification.run_identification'))
